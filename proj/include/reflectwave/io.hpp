#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "reflectwave/analysis.hpp"
#include "reflectwave/sim.hpp"

namespace reflectwave {

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// LF endings, shortest round-trip decimals.
void write_trace_csv(std::ostream& os, const Trace& tr);
void write_trace_csv(const std::string& path, const Trace& tr);

// Strict header, CRLF tolerated. Throws CsvError naming the first bad line.
Trace read_trace_csv(std::istream& is);
Trace read_trace_csv(const std::string& path);

std::string metrics_text(const Metrics& m);
std::string metrics_json(const Metrics& m);

void write_file(const std::string& path, const std::string& content);

}  // namespace reflectwave
