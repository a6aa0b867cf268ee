#ifndef OFFLOAD_SCENARIO_IO_HPP
#define OFFLOAD_SCENARIO_IO_HPP

// Text scenario files: one key per line, '#' starts a comment.
//
//   mode stationary        # or oneshot
//   f_per 0.5
//   lambda 0.225           # required iff mode is stationary
//   support 0.2 1 1 5 10   # p W L f R, one line per type, in order
//
// Values are parsed with from_chars so published parameters survive a
// round-trip exactly. Errors read "<name>:<line>: ..." and name the field.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "offload/errors.hpp"
#include "offload/model.hpp"

namespace offload {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// full-precision form used by the CSV writers; round-trips any double
inline std::string format_double_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

// All scenario-file failures carry the file name and 1-based line number.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

[[noreturn]] inline void parse_fail(std::string_view name, int line, const std::string& what) {
  std::string msg(name);
  if (line > 0) msg += ":" + std::to_string(line);
  msg += ": " + what;
  throw ParseError(msg);
}

inline double parse_number(std::string_view name, int line, std::string_view field,
                           std::string_view token) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_fail(name, line, "field " + std::string(field) + ": cannot parse '" +
                               std::string(token) + "' as a number");
  }
  return value;
}

inline void require_positive(std::string_view name, int line, std::string_view field,
                             double v) {
  if (!(v > 0) || !std::isfinite(v)) {
    parse_fail(name, line,
               "field " + std::string(field) + " must be positive and finite, got " +
                   format_double(v));
  }
}

}  // namespace detail

inline Scenario parse_scenario_text(std::string_view text, std::string_view name) {
  bool have_mode = false, have_f_per = false, have_lambda = false;
  bool stationary = false;
  double f_per = 0, lambda = 0;
  int mode_line = 0, lambda_line = 0;
  std::vector<SupportDistribution::Atom> atoms;
  double prob_sum = 0;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                          : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const auto tokens = detail::split_tokens(detail::trim(raw));
    if (tokens.empty()) continue;
    const std::string_view key = tokens[0];

    if (key == "mode") {
      if (have_mode) detail::parse_fail(name, line_no, "duplicate field mode");
      if (tokens.size() != 2) detail::parse_fail(name, line_no, "field mode expects one value");
      if (tokens[1] == "oneshot") {
        stationary = false;
      } else if (tokens[1] == "stationary") {
        stationary = true;
      } else {
        detail::parse_fail(name, line_no,
                           "field mode must be 'oneshot' or 'stationary', got '" +
                               std::string(tokens[1]) + "'");
      }
      have_mode = true;
      mode_line = line_no;
    } else if (key == "f_per") {
      if (have_f_per) detail::parse_fail(name, line_no, "duplicate field f_per");
      if (tokens.size() != 2) detail::parse_fail(name, line_no, "field f_per expects one value");
      f_per = detail::parse_number(name, line_no, "f_per", tokens[1]);
      detail::require_positive(name, line_no, "f_per", f_per);
      have_f_per = true;
    } else if (key == "lambda") {
      if (have_lambda) detail::parse_fail(name, line_no, "duplicate field lambda");
      if (tokens.size() != 2) detail::parse_fail(name, line_no, "field lambda expects one value");
      lambda = detail::parse_number(name, line_no, "lambda", tokens[1]);
      detail::require_positive(name, line_no, "lambda", lambda);
      have_lambda = true;
      lambda_line = line_no;
    } else if (key == "support") {
      if (tokens.size() != 6) {
        detail::parse_fail(name, line_no, "field support expects 5 values: p W L f R, got " +
                                              std::to_string(tokens.size() - 1));
      }
      const double p = detail::parse_number(name, line_no, "support p", tokens[1]);
      if (!(p >= 0) || !std::isfinite(p)) {
        detail::parse_fail(name, line_no, "field support p must be finite and >= 0, got " +
                                              detail::format_double(p));
      }
      Configuration c;
      c.W = detail::parse_number(name, line_no, "support W", tokens[2]);
      c.L = detail::parse_number(name, line_no, "support L", tokens[3]);
      c.f = detail::parse_number(name, line_no, "support f", tokens[4]);
      c.R = detail::parse_number(name, line_no, "support R", tokens[5]);
      detail::require_positive(name, line_no, "support W", c.W);
      detail::require_positive(name, line_no, "support L", c.L);
      detail::require_positive(name, line_no, "support f", c.f);
      detail::require_positive(name, line_no, "support R", c.R);
      atoms.push_back({p, c});
      prob_sum += p;
    } else {
      detail::parse_fail(name, line_no, "unknown field '" + std::string(key) + "'");
    }
  }

  if (!have_mode) detail::parse_fail(name, 0, "missing field mode");
  if (!have_f_per) detail::parse_fail(name, 0, "missing field f_per");
  if (stationary && !have_lambda) {
    detail::parse_fail(name, 0, "missing field lambda (required when mode is stationary)");
  }
  if (!stationary && have_lambda) {
    detail::parse_fail(name, lambda_line,
                       "field lambda is only valid when mode is stationary");
  }
  if (atoms.empty()) detail::parse_fail(name, 0, "missing field support (need at least one type)");
  if (std::abs(prob_sum - 1.0) > kProbSumTol) {
    detail::parse_fail(name, 0,
                       "support probabilities sum to " + detail::format_double(prob_sum) +
                           ", expected 1 within 1e-12");
  }
  (void)mode_line;

  SupportDistribution dist(std::move(atoms));
  if (stationary) return StationaryScenario(std::move(dist), f_per, lambda);
  return OneShotScenario(std::move(dist), f_per);
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace offload

#endif  // OFFLOAD_SCENARIO_IO_HPP
