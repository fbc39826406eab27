#include "reflectwave/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace reflectwave {

void write_trace_csv(std::ostream& os, const Trace& tr) {
    const auto& names = Trace::columns();
    for (std::size_t k = 0; k < names.size(); ++k) os << (k ? "," : "") << names[k];
    os << '\n';
    std::string row;
    char buf[32];
    for (std::size_t i = 0; i < tr.size(); ++i) {
        row.clear();
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (k) row += ',';
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, (*tr.column(k))[i]);
            row.append(buf, p);
        }
        row += '\n';
        os << row;
    }
}

void write_trace_csv(const std::string& path, const Trace& tr) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    write_trace_csv(f, tr);
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Trace read_trace_csv(std::istream& is) {
    const auto& names = Trace::columns();
    std::string header;
    for (std::size_t k = 0; k < names.size(); ++k) header += (k ? "," : "") + names[k];

    Trace tr;
    std::string line;
    std::size_t n = 0;
    bool got_header = false;
    std::size_t blank = 0;  // first blank line; only trailing blanks are allowed
    while (std::getline(is, line)) {
        ++n;
        const bool terminated = !is.eof();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!got_header) {
            if (line != header) throw CsvError(n, "expected header '" + header + "'");
            got_header = true;
            continue;
        }
        if (line.empty()) {
            if (!blank) blank = n;
            continue;
        }
        if (blank) throw CsvError(blank, "empty line");
        if (!terminated) throw CsvError(n, "truncated row (no line terminator)");
        const char* p = line.data();
        const char* end = p + line.size();
        for (std::size_t k = 0; k < names.size(); ++k) {
            double v = 0.0;
            auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc() || (q != end && *q != ','))
                throw CsvError(n, "bad value in column '" + names[k] + "'");
            tr.column(k)->push_back(v);
            p = q;
            if (k + 1 < names.size()) {
                if (p == end) throw CsvError(n, "expected " + std::to_string(names.size()) + " fields");
                ++p;
            }
        }
        if (p != end) throw CsvError(n, "too many fields");
    }
    if (!got_header) throw CsvError(n + 1, "missing header");
    return tr;
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CsvError(0, "cannot open '" + path + "'");
    return read_trace_csv(f);
}

std::string metrics_text(const Metrics& m) {
    std::ostringstream os;
    os << "peak_ratio = " << format_double(m.peak_ratio) << '\n';
    os << "ring_freq_hz = " << (m.ring_freq_hz ? format_double(*m.ring_freq_hz) : "absent") << '\n';
    os << "branch_loss_w = " << format_double(m.branch_loss_w) << '\n';
    os << "branch_energy_j = " << format_double(m.branch_energy_j) << '\n';
    os << "settle_time_s = " << format_double(m.settle_time_s) << '\n';
    os << "clamp_count = " << m.clamp_count << '\n';
    return os.str();
}

std::string metrics_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["peak_ratio"] = m.peak_ratio;
    j["ring_freq_hz"] = m.ring_freq_hz ? nlohmann::ordered_json(*m.ring_freq_hz) : nlohmann::ordered_json(nullptr);
    j["branch_loss_w"] = m.branch_loss_w;
    j["branch_energy_j"] = m.branch_energy_j;
    j["settle_time_s"] = m.settle_time_s;
    j["clamp_count"] = m.clamp_count;
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << content;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace reflectwave
