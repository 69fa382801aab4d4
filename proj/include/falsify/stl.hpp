#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace falsify::stl {

// Uniformly sampled, possibly vector-valued trajectory. All channels share
// the same time grid: t_i = start_time + i * step.
struct Signal {
  double start_time = 0.0;
  double step = 1.0;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> samples;  // one sequence per channel

  // Validates: step > 0, unique channel names, equal sample counts >= 1.
  static Signal make(double start_time, double step,
                     std::vector<std::pair<std::string, std::vector<double>>> data);

  std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }
  double end_time() const { return start_time + step * static_cast<double>(length() - 1); }
  // Index of `name` in channels, -1 if absent.
  int channel_index(std::string_view name) const;
};

enum class Comparison { less, greater };

// STL formula AST. Predicates are affine comparisons of a channel against a
// constant; temporal operators carry closed intervals [lo, hi] with
// 0 <= lo <= hi. Nodes are immutable and shared.
struct Formula {
  enum class Kind {
    predicate,
    negation,
    conjunction,
    disjunction,
    implication,
    globally,
    eventually,
  };

  Kind kind = Kind::predicate;
  // predicate
  std::string channel;
  Comparison cmp = Comparison::less;
  double threshold = 0.0;
  // temporal window
  double lo = 0.0;
  double hi = 0.0;
  // children: left only for unary nodes
  std::shared_ptr<const Formula> left;
  std::shared_ptr<const Formula> right;
};

bool operator==(const Formula& a, const Formula& b);

// Node factories; these enforce the AST invariants.
Formula pred(std::string channel, Comparison cmp, double threshold);
Formula negation(Formula f);
Formula conjunction(Formula a, Formula b);
Formula disjunction(Formula a, Formula b);
Formula implication(Formula a, Formula b);
Formula globally(double lo, double hi, Formula f);
Formula eventually(double lo, double hi, Formula f);

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t position);
  std::size_t position;  // byte offset into the input text
};

// Parses the ASCII grammar:
//   always[a,b] f | eventually[a,b] f | not f | f and g | f or g | f -> g
//   | (NAME < NUM) | (NAME > NUM) | (f)
// Precedence: not/always/eventually > and > or > -> (right associative).
Formula parse_stl(std::string_view text);

// Canonical text form; parse_stl(to_string(f)) == f.
std::string to_string(const Formula& f);

// Quantitative robustness of f on s at time t0 over the discrete sample
// grid (no interpolation). Windows snap to grid indices; f holds at t0 iff
// the result is >= 0. Throws if a window leaves the signal span or a
// predicate references an unknown channel.
double robustness(const Formula& f, const Signal& s, double t0 = 0.0);

// Ad hoc automatic-transmission robustness: with M_RPM the sup of `rpm_channel`
// over [0, 30] and M_SPEED the sup of `speed_channel` over [0, speed_horizon],
// returns 0.5 * (speed_bound - M_SPEED) / speed_bound when M_RPM < 3000 and
// M_RPM / 3000 - 0.5 otherwise. rho_1..rho_3 use (bound, horizon) =
// (35, 4), (50, 8), (65, 20).
double at_robustness(const Signal& s, std::string_view rpm_channel,
                     std::string_view speed_channel, double speed_bound,
                     double speed_horizon);

}  // namespace falsify::stl
