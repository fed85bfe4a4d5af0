#include "paropt/iteration_log.hpp"

#include <charconv>
#include <stdexcept>

namespace paropt {

void IterationLog::append(std::span<const double> par, double fn, std::span<const double> gr) {
  if (rows_.empty() && p_ == 0) p_ = par.size();
  if (par.size() != p_ || gr.size() != p_) {
    throw std::logic_error("log row has par/gr lengths " + std::to_string(par.size()) + "/" +
                           std::to_string(gr.size()) + ", expected " + std::to_string(p_));
  }
  const int iter = rows_.empty() ? 1 : rows_.back().iter + 1;
  rows_.push_back(LogRow{iter, ParameterVector(par.begin(), par.end()), fn,
                         std::vector<double>(gr.begin(), gr.end())});
}

namespace {

void put(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view s, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ConfigError("log CSV line " + std::to_string(line_no) + ": bad number '" +
                      std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string to_csv(const IterationLog& log) {
  const std::size_t p = log.dimension();
  std::string out = "iter";
  for (std::size_t i = 1; i <= p; ++i) out += ",par" + std::to_string(i);
  out += ",fn";
  for (std::size_t i = 1; i <= p; ++i) out += ",gr" + std::to_string(i);
  out += '\n';
  for (const auto& row : log.rows()) {
    out += std::to_string(row.iter);
    for (double v : row.par) {
      out += ',';
      put(out, v);
    }
    out += ',';
    put(out, row.fn);
    for (double v : row.gr) {
      out += ',';
      put(out, v);
    }
    out += '\n';
  }
  return out;
}

IterationLog parse_log_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ConfigError("log CSV is empty");

  const auto header = split(lines[0], ',');
  if (header.size() < 2 || header.size() % 2 != 0 || header.front() != "iter") {
    throw ConfigError("log CSV header is malformed");
  }
  const std::size_t p = (header.size() - 2) / 2;
  if (header[p + 1] != "fn") throw ConfigError("log CSV header is malformed");

  IterationLog log(p);
  std::vector<double> par(p), gr(p);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto fields = split(lines[k], ',');
    if (fields.size() != header.size()) {
      throw ConfigError("log CSV line " + std::to_string(k + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    const int iter = parse_field<int>(fields[0], k + 1);
    for (std::size_t i = 0; i < p; ++i) par[i] = parse_field<double>(fields[1 + i], k + 1);
    const double fn = parse_field<double>(fields[1 + p], k + 1);
    for (std::size_t i = 0; i < p; ++i) gr[i] = parse_field<double>(fields[2 + p + i], k + 1);
    log.append(par, fn, gr);
    if (log.rows().back().iter != iter) {
      throw ConfigError("log CSV line " + std::to_string(k + 1) + ": iter values must be 1..n");
    }
  }
  return log;
}

}  // namespace paropt
