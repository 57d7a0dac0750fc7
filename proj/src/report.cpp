#include "wavedbn/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

std::string real(double value)
{
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string fixed(double value, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string index2(std::size_t i)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", i);
    return buf;
}

void add_split(KeyValues& kv, const SplitReport& s)
{
    const EvaluationMetrics& m = s.metrics;
    const std::string p = s.name + ".";
    kv.emplace_back(p + "samples", std::to_string(m.total));
    kv.emplace_back(p + "accuracy", real(m.accuracy));
    kv.emplace_back(p + "error_percent", real(error_percent(m.accuracy)));
    kv.emplace_back(p + "inference_seconds", real(m.total_seconds));
    for(std::size_t j = 0; j < m.per_dbn_accuracy.size(); ++j)
        kv.emplace_back(p + "dbn." + index2(j) + ".accuracy", real(m.per_dbn_accuracy[j]));
    for(std::size_t c = 0; c < m.per_class_accuracy.size(); ++c)
        kv.emplace_back(p + "class." + index2(c) + ".accuracy", real(m.per_class_accuracy[c]));
    for(std::size_t c = 0; c < m.confusion.size(); ++c) {
        std::string row;
        for(std::size_t q = 0; q < m.confusion[c].size(); ++q)
            row += (q > 0 ? " " : "") + std::to_string(m.confusion[c][q]);
        kv.emplace_back(p + "confusion." + index2(c), row);
    }
}

void add_config(KeyValues& kv, const std::string& config_text)
{
    std::istringstream in(config_text);
    std::string section;
    for(std::string line; std::getline(in, line);) {
        if(line.empty() || line[0] == '#')
            continue;
        if(line.front() == '[') {
            section = line.substr(1, line.find(']') - 1);
            continue;
        }
        const auto eq = line.find(" = ");
        if(eq != std::string::npos)
            kv.emplace_back("config." + section + "." + line.substr(0, eq), line.substr(eq + 3));
    }
}

void table_split(std::ostringstream& out, const SplitReport& s)
{
    const EvaluationMetrics& m = s.metrics;
    out << "\n[" << s.name << "] " << m.total << " samples, ensemble accuracy " << fixed(100.0 * m.accuracy, 2)
        << "%, error " << fixed(error_percent(m.accuracy), 2) << "%\n";
    out << "confusion matrix (rows: true class, columns: predicted)\n";
    for(std::size_t c = 0; c < m.confusion.size(); ++c) {
        char label[16];
        std::snprintf(label, sizeof label, "%4zu |", c);
        out << label;
        for(std::size_t v : m.confusion[c]) {
            char cell[16];
            std::snprintf(cell, sizeof cell, " %4zu", v);
            out << cell;
        }
        out << "\n";
    }
}

} // namespace

const SplitReport* ReportRecord::split(const std::string& name) const
{
    for(const SplitReport& s : splits)
        if(s.name == name)
            return &s;
    return nullptr;
}

KeyValues to_key_values(const ReportRecord& r)
{
    KeyValues kv;
    kv.emplace_back("report.command", r.command);
    if(r.has_training) {
        double sum = 0.0;
        for(std::size_t j = 0; j < kSubbandCount; ++j) {
            const DbnTiming& t = r.dbn_timings[j];
            const std::string p = "dbn." + index2(j) + ".";
            kv.emplace_back(p + "pretrain_seconds", real(t.pretrain_seconds));
            kv.emplace_back(p + "finetune_seconds", real(t.finetune_seconds));
            kv.emplace_back(p + "train_seconds", real(t.total()));
            sum += t.total();
        }
        kv.emplace_back("timing.sum_dbn_seconds", real(sum));
        kv.emplace_back("timing.mean_dbn_seconds", real(sum / static_cast<double>(kSubbandCount)));
    }
    kv.emplace_back("timing.total_wall_seconds", real(r.total_wall_seconds));
    for(std::size_t j = 0; j < r.weights.size(); ++j)
        kv.emplace_back("ensemble.weight." + index2(j), real(r.weights[j]));
    for(const SplitReport& s : r.splits)
        add_split(kv, s);
    add_config(kv, r.config_text);
    return kv;
}

std::string format_key_values(const KeyValues& kv)
{
    std::string out;
    for(const auto& [key, value] : kv)
        out += key + "=" + value + "\n";
    return out;
}

KeyValues parse_key_values(const std::string& text)
{
    KeyValues kv;
    std::istringstream in(text);
    std::size_t line_no = 0;
    for(std::string line; std::getline(in, line);) {
        ++line_no;
        if(line.empty())
            continue;
        const auto eq = line.find('=');
        if(eq == std::string::npos)
            throw IoError("report line " + std::to_string(line_no) + ": missing '='");
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
}

std::string format_table(const ReportRecord& r)
{
    std::ostringstream out;
    out << "wavedbn " << r.command << " report\n";
    if(r.has_training || !r.weights.empty()) {
        out << (r.has_training ? "\n sub-band  pretrain(s)  finetune(s)  total(s)  weight" : "\n sub-band  weight");
        for(const SplitReport& s : r.splits)
            out << "  " << s.name << "-acc";
        out << "\n";
        for(std::size_t j = 0; j < kSubbandCount; ++j) {
            char line[128];
            const DbnTiming& t = r.dbn_timings[j];
            const double w = j < r.weights.size() ? r.weights[j] : 0.0;
            if(r.has_training)
                std::snprintf(line, sizeof line, " %2zu %-5s  %11.3f  %11.3f  %8.3f  %6.4f", j, subband_name(j).c_str(),
                              t.pretrain_seconds, t.finetune_seconds, t.total(), w);
            else
                std::snprintf(line, sizeof line, " %2zu %-5s  %6.4f", j, subband_name(j).c_str(), w);
            out << line;
            for(const SplitReport& s : r.splits) {
                const double acc = j < s.metrics.per_dbn_accuracy.size() ? s.metrics.per_dbn_accuracy[j] : 0.0;
                char cell[32];
                std::snprintf(cell, sizeof cell, "  %*.4f", static_cast<int>(s.name.size() + 4), acc);
                out << cell;
            }
            out << "\n";
        }
    }
    out << "\ntotal wall time: " << fixed(r.total_wall_seconds, 3) << " s\n";
    for(const SplitReport& s : r.splits)
        table_split(out, s);
    return out.str();
}

double BenchReport::mean_dbn_seconds() const
{
    double sum = 0.0;
    for(const DbnTiming& t : ensemble.dbn_timings)
        sum += t.total();
    return sum / static_cast<double>(kSubbandCount);
}

double BenchReport::max_dbn_seconds() const
{
    double top = 0.0;
    for(const DbnTiming& t : ensemble.dbn_timings)
        top = std::max(top, t.total());
    return top;
}

double BenchReport::per_dbn_speedup() const
{
    const double mean = mean_dbn_seconds();
    return mean > 0.0 ? monolithic_timing.total() / mean : 0.0;
}

KeyValues to_key_values(const BenchReport& b)
{
    KeyValues kv = to_key_values(b.ensemble);
    kv.emplace_back("bench.ensemble.sequential_wall_seconds", real(b.sequential_wall_seconds));
    kv.emplace_back("bench.ensemble.parallel_wall_seconds", real(b.parallel_wall_seconds));
    kv.emplace_back("bench.ensemble.parallel_workers", std::to_string(b.parallel_workers));
    kv.emplace_back("bench.ensemble.parallel_matches_sequential", b.parallel_matches_sequential ? "true" : "false");
    kv.emplace_back("bench.ensemble.mean_dbn_seconds", real(b.mean_dbn_seconds()));
    kv.emplace_back("bench.ensemble.max_dbn_seconds", real(b.max_dbn_seconds()));
    kv.emplace_back("bench.subband_dbn.input_dim", std::to_string(b.subband_input_dim));
    kv.emplace_back("bench.subband_dbn.parameters", std::to_string(b.subband_dbn_parameters));
    kv.emplace_back("bench.monolithic.input_dim", std::to_string(b.monolithic_input_dim));
    kv.emplace_back("bench.monolithic.parameters", std::to_string(b.monolithic_parameters));
    kv.emplace_back("bench.monolithic.pretrain_seconds", real(b.monolithic_timing.pretrain_seconds));
    kv.emplace_back("bench.monolithic.finetune_seconds", real(b.monolithic_timing.finetune_seconds));
    kv.emplace_back("bench.monolithic.train_seconds", real(b.monolithic_timing.total()));
    kv.emplace_back("bench.monolithic.train_accuracy", real(b.monolithic_train_accuracy));
    kv.emplace_back("bench.monolithic.test_accuracy", real(b.monolithic_test_accuracy));
    kv.emplace_back("bench.speedup.per_dbn", real(b.per_dbn_speedup()));
    kv.emplace_back("bench.speedup.parallel_vs_sequential",
                    real(b.parallel_wall_seconds > 0.0 ? b.sequential_wall_seconds / b.parallel_wall_seconds : 0.0));
    return kv;
}

std::string format_table(const BenchReport& b)
{
    std::ostringstream out;
    out << format_table(b.ensemble);
    const SplitReport* test = b.ensemble.split("test");
    out << "\nsub-band ensemble vs monolithic raw-pixel DBN\n"
        << "                         ensemble (per DBN)   monolithic\n";
    char line[160];
    std::snprintf(line, sizeof line, " input dimension        %18zu   %10zu\n", b.subband_input_dim, b.monolithic_input_dim);
    out << line;
    std::snprintf(line, sizeof line, " parameters             %18zu   %10zu\n", b.subband_dbn_parameters, b.monolithic_parameters);
    out << line;
    std::snprintf(line, sizeof line, " train time (s, mean)   %18.3f   %10.3f\n", b.mean_dbn_seconds(), b.monolithic_timing.total());
    out << line;
    std::snprintf(line, sizeof line, " test accuracy (%%)      %18.2f   %10.2f\n",
                  test != nullptr ? 100.0 * test->metrics.accuracy : 0.0, 100.0 * b.monolithic_test_accuracy);
    out << line;
    out << "\nper-DBN speedup: " << fixed(b.per_dbn_speedup(), 2) << "x\n"
        << "ensemble wall time: sequential " << fixed(b.sequential_wall_seconds, 3) << " s, parallel ("
        << b.parallel_workers << " workers) " << fixed(b.parallel_wall_seconds, 3) << " s; models "
        << (b.parallel_matches_sequential ? "identical" : "DIFFER") << "\n";
    return out.str();
}

void write_report_files(const std::filesystem::path& dir, const std::string& stem, const KeyValues& kv,
                        const std::string& table)
{
    std::filesystem::create_directories(dir);
    for(const auto& [ext, text] : {std::pair{".kv", format_key_values(kv)}, std::pair{".txt", table}}) {
        const auto path = dir / (stem + ext);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if(!out.write(text.data(), static_cast<std::streamsize>(text.size())))
            throw IoError(path.string() + ": cannot write report");
    }
}

} // namespace wavedbn
