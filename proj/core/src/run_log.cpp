#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nuemt/errors.hpp"
#include "nuemt/experiment.hpp"

namespace nuemt {

namespace {

constexpr std::size_t kColumns = 9;

void append_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "nan";
    return;
  }
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, end);
}

template <typename T>
void append_list(std::string& out, const std::vector<T>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ';';
    if constexpr (std::is_floating_point_v<T>) {
      append_double(out, values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_value(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ConfigError("run_log", "line " + std::to_string(line) + ": cannot parse '" +
                                     std::string(field) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view field, std::size_t line) {
  std::vector<T> out;
  if (field.empty()) return out;
  for (auto part : split(field, ';')) out.push_back(parse_value<T>(part, line));
  return out;
}

}  // namespace

std::string run_log_header() {
  return "iteration,timesteps,stage,target_eval_return,population_mean_return,horizons,"
         "task_mean_returns,mixture_coefficients,allocations";
}

std::string format_run_log_row(const RunLogRow& row) {
  std::string out;
  out += std::to_string(row.iteration);
  out += ',';
  out += std::to_string(row.timesteps);
  out += ',';
  out += std::to_string(row.stage);
  out += ',';
  append_double(out, row.target_eval_return);
  out += ',';
  append_double(out, row.population_mean_return);
  out += ',';
  append_list(out, row.horizons);
  out += ',';
  append_list(out, row.task_mean_returns);
  out += ',';
  append_list(out, row.mixture_coefficients);
  out += ',';
  append_list(out, row.allocations);
  return out;
}

std::string format_run_log(const std::vector<RunLogRow>& rows) {
  std::string out = run_log_header() + "\n";
  for (const auto& row : rows) out += format_run_log_row(row) + "\n";
  return out;
}

std::vector<RunLogRow> parse_run_log(std::string_view csv) {
  std::vector<RunLogRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  for (auto line : split(csv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != run_log_header()) throw ConfigError("run_log", "unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != kColumns) {
      throw ConfigError("run_log", "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(kColumns) + " columns");
    }
    RunLogRow r;
    r.iteration = parse_value<std::uint64_t>(f[0], line_no);
    r.timesteps = parse_value<std::uint64_t>(f[1], line_no);
    r.stage = parse_value<std::size_t>(f[2], line_no);
    r.target_eval_return = parse_value<double>(f[3], line_no);
    r.population_mean_return = parse_value<double>(f[4], line_no);
    r.horizons = parse_list<std::size_t>(f[5], line_no);
    r.task_mean_returns = parse_list<double>(f[6], line_no);
    r.mixture_coefficients = parse_list<double>(f[7], line_no);
    r.allocations = parse_list<std::size_t>(f[8], line_no);
    if (!rows.empty() && r.timesteps <= rows.back().timesteps) {
      throw ConfigError("run_log", "line " + std::to_string(line_no) +
                                       ": cumulative timesteps are not increasing");
    }
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw ConfigError("run_log", "empty log");
  return rows;
}

std::vector<RunLogRow> read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("run_log", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_log(buffer.str());
}

}  // namespace nuemt
