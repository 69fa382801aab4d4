#include "falsify/stl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>
#include <utility>

namespace falsify::stl {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Signal Signal::make(double start_time, double step,
                    std::vector<std::pair<std::string, std::vector<double>>> data) {
  if (!(step > 0.0)) throw std::invalid_argument("signal step must be > 0");
  if (data.empty()) throw std::invalid_argument("signal needs at least one channel");
  Signal s;
  s.start_time = start_time;
  s.step = step;
  std::unordered_set<std::string> seen;
  std::size_t len = data.front().second.size();
  for (auto& [name, values] : data) {
    if (name.empty()) throw std::invalid_argument("channel name must be nonempty");
    if (!seen.insert(name).second)
      throw std::invalid_argument("duplicate channel name: " + name);
    if (values.size() != len || values.empty())
      throw std::invalid_argument("all channels need the same nonzero length");
    s.channels.push_back(std::move(name));
    s.samples.push_back(std::move(values));
  }
  return s;
}

int Signal::channel_index(std::string_view name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == name) return static_cast<int>(i);
  return -1;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::predicate:
      return a.channel == b.channel && a.cmp == b.cmp && a.threshold == b.threshold;
    case Formula::Kind::negation:
      return *a.left == *b.left;
    case Formula::Kind::conjunction:
    case Formula::Kind::disjunction:
    case Formula::Kind::implication:
      return *a.left == *b.left && *a.right == *b.right;
    case Formula::Kind::globally:
    case Formula::Kind::eventually:
      return a.lo == b.lo && a.hi == b.hi && *a.left == *b.left;
  }
  return false;
}

namespace {

std::shared_ptr<const Formula> box(Formula f) {
  return std::make_shared<const Formula>(std::move(f));
}

Formula binary(Formula::Kind kind, Formula a, Formula b) {
  Formula f;
  f.kind = kind;
  f.left = box(std::move(a));
  f.right = box(std::move(b));
  return f;
}

Formula temporal(Formula::Kind kind, double lo, double hi, Formula inner) {
  if (!(lo >= 0.0) || !(hi >= lo))
    throw std::invalid_argument("temporal interval needs 0 <= a <= b");
  Formula f;
  f.kind = kind;
  f.lo = lo;
  f.hi = hi;
  f.left = box(std::move(inner));
  return f;
}

}  // namespace

Formula pred(std::string channel, Comparison cmp, double threshold) {
  if (channel.empty()) throw std::invalid_argument("predicate channel must be nonempty");
  Formula f;
  f.kind = Formula::Kind::predicate;
  f.channel = std::move(channel);
  f.cmp = cmp;
  f.threshold = threshold;
  return f;
}

Formula negation(Formula f) {
  Formula out;
  out.kind = Formula::Kind::negation;
  out.left = box(std::move(f));
  return out;
}

Formula conjunction(Formula a, Formula b) {
  return binary(Formula::Kind::conjunction, std::move(a), std::move(b));
}

Formula disjunction(Formula a, Formula b) {
  return binary(Formula::Kind::disjunction, std::move(a), std::move(b));
}

Formula implication(Formula a, Formula b) {
  return binary(Formula::Kind::implication, std::move(a), std::move(b));
}

Formula globally(double lo, double hi, Formula f) {
  return temporal(Formula::Kind::globally, lo, hi, std::move(f));
}

Formula eventually(double lo, double hi, Formula f) {
  return temporal(Formula::Kind::eventually, lo, hi, std::move(f));
}

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
      position(pos) {}

namespace {

struct Token {
  enum class Type {
    ident,     // channel names and keywords
    number,
    lparen,
    rparen,
    lbracket,
    rbracket,
    comma,
    less,
    greater,
    minus,
    arrow,
    end,
  };
  Type type = Type::end;
  std::string text;
  double value = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    Token t;
    t.pos = pos_;
    if (pos_ >= text_.size()) return t;
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      t.type = Token::Type::ident;
      t.text = std::string(text_.substr(start, pos_ - start));
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      const char* end = text_.data() + text_.size();
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc()) throw ParseError("malformed number", pos_);
      t.type = Token::Type::number;
      t.text = std::string(begin, ptr);
      t.value = value;
      pos_ += static_cast<std::size_t>(ptr - begin);
      return t;
    }
    switch (c) {
      case '(': t.type = Token::Type::lparen; break;
      case ')': t.type = Token::Type::rparen; break;
      case '[': t.type = Token::Type::lbracket; break;
      case ']': t.type = Token::Type::rbracket; break;
      case ',': t.type = Token::Type::comma; break;
      case '<': t.type = Token::Type::less; break;
      case '>': t.type = Token::Type::greater; break;
      case '-':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
          t.type = Token::Type::arrow;
          ++pos_;
        } else {
          t.type = Token::Type::minus;
        }
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
    ++pos_;
    return t;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  Formula parse() {
    Formula f = parse_implication();
    if (cur_.type != Token::Type::end)
      throw ParseError("unexpected trailing input", cur_.pos);
    return f;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  void expect(Token::Type type, const char* what) {
    if (cur_.type != type) throw ParseError(std::string("expected ") + what, cur_.pos);
    advance();
  }

  // -> is right associative and binds loosest
  Formula parse_implication() {
    Formula lhs = parse_or();
    if (cur_.type == Token::Type::arrow) {
      advance();
      return implication(std::move(lhs), parse_implication());
    }
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (cur_.type == Token::Type::ident && cur_.text == "or") {
      advance();
      lhs = disjunction(std::move(lhs), parse_and());
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (cur_.type == Token::Type::ident && cur_.text == "and") {
      advance();
      lhs = conjunction(std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (cur_.type == Token::Type::ident) {
      if (cur_.text == "not") {
        advance();
        return negation(parse_unary());
      }
      if (cur_.text == "always" || cur_.text == "eventually") {
        bool is_globally = cur_.text == "always";
        std::size_t at = cur_.pos;
        advance();
        auto [lo, hi] = parse_interval(at);
        Formula inner = parse_unary();
        return is_globally ? globally(lo, hi, std::move(inner))
                           : eventually(lo, hi, std::move(inner));
      }
      if (cur_.text == "until")
        throw ParseError("'until' is not supported", cur_.pos);
    }
    return parse_primary();
  }

  std::pair<double, double> parse_interval(std::size_t operator_pos) {
    expect(Token::Type::lbracket, "'[' after temporal operator");
    double lo = parse_bound();
    expect(Token::Type::comma, "','");
    double hi = parse_bound();
    expect(Token::Type::rbracket, "']'");
    if (lo > hi) throw ParseError("interval lower bound exceeds upper bound", operator_pos);
    return {lo, hi};
  }

  double parse_bound() {
    if (cur_.type != Token::Type::number)
      throw ParseError("expected interval bound", cur_.pos);
    if (cur_.value < 0.0) throw ParseError("interval bound must be nonnegative", cur_.pos);
    double v = cur_.value;
    advance();
    return v;
  }

  // A '(' either groups a subformula or opens a predicate; a formula can
  // never start with a bare channel name, which disambiguates.
  Formula parse_primary() {
    if (cur_.type != Token::Type::lparen)
      throw ParseError("expected '(' or operator", cur_.pos);
    advance();
    if (cur_.type == Token::Type::ident && cur_.text != "not" &&
        cur_.text != "always" && cur_.text != "eventually" && cur_.text != "until") {
      std::string channel = cur_.text;
      advance();
      Comparison cmp;
      if (cur_.type == Token::Type::less) {
        cmp = Comparison::less;
      } else if (cur_.type == Token::Type::greater) {
        cmp = Comparison::greater;
      } else {
        throw ParseError("expected '<' or '>' in predicate", cur_.pos);
      }
      advance();
      double sign = 1.0;
      if (cur_.type == Token::Type::minus) {
        sign = -1.0;
        advance();
      }
      if (cur_.type != Token::Type::number)
        throw ParseError("expected predicate threshold", cur_.pos);
      double threshold = sign * cur_.value;
      advance();
      expect(Token::Type::rparen, "')'");
      return pred(std::move(channel), cmp, threshold);
    }
    Formula inner = parse_implication();
    expect(Token::Type::rparen, "')'");
    return inner;
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

Formula parse_stl(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::predicate:
      return "(" + f.channel + (f.cmp == Comparison::less ? " < " : " > ") +
             format_number(f.threshold) + ")";
    case Formula::Kind::negation:
      return "not " + to_string(*f.left);
    case Formula::Kind::conjunction:
      return "(" + to_string(*f.left) + " and " + to_string(*f.right) + ")";
    case Formula::Kind::disjunction:
      return "(" + to_string(*f.left) + " or " + to_string(*f.right) + ")";
    case Formula::Kind::implication:
      return "(" + to_string(*f.left) + " -> " + to_string(*f.right) + ")";
    case Formula::Kind::globally:
      return "always[" + format_number(f.lo) + "," + format_number(f.hi) + "] " +
             to_string(*f.left);
    case Formula::Kind::eventually:
      return "eventually[" + format_number(f.lo) + "," + format_number(f.hi) + "] " +
             to_string(*f.left);
  }
  throw std::logic_error("unreachable formula kind");
}

namespace {

// Inclusive grid index range covering [t_lo, t_hi]; throws when the window
// leaves the signal span or contains no sample.
struct IndexWindow {
  long lo;
  long hi;
};

IndexWindow window_indices(const Signal& s, double t_lo, double t_hi) {
  const double eps = s.step * 1e-9;
  if (t_lo < s.start_time - eps || t_hi > s.end_time() + eps)
    throw std::out_of_range("temporal window exceeds signal span");
  long lo = static_cast<long>(std::ceil((t_lo - s.start_time) / s.step - 1e-9));
  long hi = static_cast<long>(std::floor((t_hi - s.start_time) / s.step + 1e-9));
  lo = std::max(lo, 0L);
  hi = std::min(hi, static_cast<long>(s.length()) - 1);
  if (lo > hi) throw std::out_of_range("temporal window contains no sample");
  return {lo, hi};
}

double eval(const Formula& f, const Signal& s, long i) {
  switch (f.kind) {
    case Formula::Kind::predicate: {
      int c = s.channel_index(f.channel);
      if (c < 0) throw std::invalid_argument("unknown channel: " + f.channel);
      double v = s.samples[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
      return f.cmp == Comparison::less ? f.threshold - v : v - f.threshold;
    }
    case Formula::Kind::negation:
      return -eval(*f.left, s, i);
    case Formula::Kind::conjunction:
      return std::min(eval(*f.left, s, i), eval(*f.right, s, i));
    case Formula::Kind::disjunction:
      return std::max(eval(*f.left, s, i), eval(*f.right, s, i));
    case Formula::Kind::implication:
      return std::max(-eval(*f.left, s, i), eval(*f.right, s, i));
    case Formula::Kind::globally:
    case Formula::Kind::eventually: {
      double t_i = s.start_time + static_cast<double>(i) * s.step;
      IndexWindow w = window_indices(s, t_i + f.lo, t_i + f.hi);
      bool is_globally = f.kind == Formula::Kind::globally;
      double acc = is_globally ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
      for (long j = w.lo; j <= w.hi; ++j) {
        double v = eval(*f.left, s, j);
        acc = is_globally ? std::min(acc, v) : std::max(acc, v);
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

double robustness(const Formula& f, const Signal& s, double t0) {
  const double eps = s.step * 1e-9;
  if (t0 < s.start_time - eps || t0 > s.end_time() + eps)
    throw std::out_of_range("t0 outside signal span");
  long i0 = std::lround((t0 - s.start_time) / s.step);
  i0 = std::clamp(i0, 0L, static_cast<long>(s.length()) - 1);
  return eval(f, s, i0);
}

double at_robustness(const Signal& s, std::string_view rpm_channel,
                     std::string_view speed_channel, double speed_bound,
                     double speed_horizon) {
  if (!(speed_bound > 0.0)) throw std::invalid_argument("speed bound must be > 0");
  int rpm = s.channel_index(rpm_channel);
  int spd = s.channel_index(speed_channel);
  if (rpm < 0 || spd < 0) throw std::invalid_argument("unknown channel for at_robustness");

  auto sup_over = [&](int channel, double t_hi) {
    IndexWindow w = window_indices(s, 0.0, t_hi);
    const auto& values = s.samples[static_cast<std::size_t>(channel)];
    double m = values[static_cast<std::size_t>(w.lo)];
    for (long j = w.lo + 1; j <= w.hi; ++j)
      m = std::max(m, values[static_cast<std::size_t>(j)]);
    return m;
  };

  double m_rpm = sup_over(rpm, 30.0);
  double m_speed = sup_over(spd, speed_horizon);
  if (m_rpm < 3000.0) return 0.5 * (speed_bound - m_speed) / speed_bound;
  return m_rpm / 3000.0 - 0.5;
}

}  // namespace falsify::stl
