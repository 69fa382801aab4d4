#include "falsify/suts.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace falsify::suts {

std::vector<double> denormalize(std::span<const Range> ranges,
                                std::span<const double> normalized) {
  if (ranges.size() != normalized.size())
    throw std::invalid_argument("test dimension does not match SUT ranges");
  std::vector<double> raw(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    double t = normalized[i];
    if (!(t >= -1.0 && t <= 1.0))
      throw std::out_of_range("normalized coordinate outside [-1,1]");
    const Range& r = ranges[i];
    raw[i] = r.lo + (t + 1.0) * 0.5 * (r.hi - r.lo);
  }
  return raw;
}

std::array<double, 3> mo3d(double x1, double x2, double x3) {
  const std::array<double, 3> x{x1, x2, x3};
  double s1 = 0.0, s2 = 0.0, sq = 0.0, sc = 0.0;
  for (double xi : x) {
    s1 += std::sin(xi / 3.0);
    s2 += std::cos(xi / 2.5 + 15.0);
    sq += (xi - 7.0) * (xi - 7.0);
    sc += std::cos((xi - 7.0) / 2.75);
  }
  return {305.0 - 100.0 * s1, 230.0 - 75.0 * s2, sq - sc};
}

namespace {
constexpr Range kMo3dRange{-15.0, 15.0};
const std::array<Range, 3> kMo3dRanges{kMo3dRange, kMo3dRange, kMo3dRange};
}  // namespace

std::span<const Range> Mo3dSut::ranges() const { return kMo3dRanges; }

std::vector<double> Mo3dSut::execute(std::span<const double> normalized) {
  std::vector<double> x = denormalize(ranges(), normalized);
  auto h = mo3d(x[0], x[1], x[2]);
  return {h[0], h[1], h[2]};
}

AtSurrogateSut::AtSurrogateSut(AtParams params) : params_(params) {
  ranges_.assign(6, Range{0.0, 100.0});    // throttle pieces
  ranges_.resize(12, Range{0.0, 325.0});   // brake pieces
}

std::span<const Range> AtSurrogateSut::ranges() const { return ranges_; }

stl::Signal AtSurrogateSut::simulate(std::span<const double> normalized) const {
  std::vector<double> raw = denormalize(ranges_, normalized);
  constexpr double dt = 0.2;
  constexpr int n_samples = 151;  // [0, 30]
  auto piece = [](double t) {
    int p = static_cast<int>(t / 5.0);
    return p > 5 ? 5 : p;
  };
  std::vector<double> speed(n_samples), rpm(n_samples);
  double v = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    double t = dt * static_cast<double>(k);
    double throttle = raw[static_cast<std::size_t>(piece(t))];
    double brake = raw[static_cast<std::size_t>(6 + piece(t))];
    speed[static_cast<std::size_t>(k)] = v;
    rpm[static_cast<std::size_t>(k)] =
        params_.rpm_idle + params_.rpm_per_speed * v + params_.rpm_per_throttle * throttle;
    double dv = params_.throttle_gain * throttle - params_.brake_gain * brake -
                params_.drag * v;
    v = std::max(0.0, v + dt * dv);
  }
  return stl::Signal::make(0.0, dt, {{"RPM", std::move(rpm)}, {"SPEED", std::move(speed)}});
}

std::vector<double> AtSurrogateSut::execute(std::span<const double> normalized) {
  stl::Signal s = simulate(normalized);
  return {stl::at_robustness(s, "RPM", "SPEED", 35.0, 4.0),
          stl::at_robustness(s, "RPM", "SPEED", 50.0, 8.0),
          stl::at_robustness(s, "RPM", "SPEED", 65.0, 20.0)};
}

namespace {

std::map<std::string, std::function<std::unique_ptr<Sut>()>>& registry() {
  static std::map<std::string, std::function<std::unique_ptr<Sut>()>> map{
      {"mo3d", [] { return std::make_unique<Mo3dSut>(); }},
      {"at-surrogate", [] { return std::make_unique<AtSurrogateSut>(); }},
  };
  return map;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_sut(const std::string& name, std::function<std::unique_ptr<Sut>()> factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<Sut> make_sut(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown SUT: " + name);
  return it->second();
}

std::vector<std::string> registered_suts() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

}  // namespace falsify::suts
