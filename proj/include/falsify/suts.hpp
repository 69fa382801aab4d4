#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "falsify/stl.hpp"

namespace falsify::suts {

struct Range {
  double lo = -1.0;
  double hi = 1.0;
};

// Affine map from normalized [-1,1]^d onto the raw per-dimension ranges.
// Throws when a coordinate leaves [-1,1].
std::vector<double> denormalize(std::span<const Range> ranges,
                                std::span<const double> normalized);

// Black-box system under test. Tests arrive in normalized [-1,1]^d; execute
// returns one raw robustness value per requirement.
class Sut {
 public:
  virtual ~Sut() = default;
  virtual std::string name() const = 0;
  virtual int input_dim() const = 0;
  virtual int requirement_count() const = 0;
  virtual std::span<const Range> ranges() const = 0;
  virtual std::vector<double> execute(std::span<const double> normalized) = 0;
};

// The synthetic mo3d benchmark: component values double as robustness
// values, all trigonometric arguments in radians.
//   h1 = 305 - 100 * sum sin(x_i / 3)
//   h2 = 230 -  75 * sum cos(x_i / 2.5 + 15)
//   h3 = sum (x_i - 7)^2 - sum cos((x_i - 7) / 2.75)
std::array<double, 3> mo3d(double x1, double x2, double x3);

class Mo3dSut final : public Sut {
 public:
  std::string name() const override { return "mo3d"; }
  int input_dim() const override { return 3; }
  int requirement_count() const override { return 3; }
  std::span<const Range> ranges() const override;
  std::vector<double> execute(std::span<const double> normalized) override;
};

// Longitudinal-dynamics stand-in for the automatic-transmission benchmark.
// Inputs are piecewise-constant THROTTLE in [0,100] and BRAKE in [0,325]
// signals with 6 pieces of 5 time units each, encoded as a test in R^12
// (throttle pieces first). The simulation runs forward Euler on
//   speed' = throttle_gain * throttle - brake_gain * brake - drag * speed
// clamped at 0, with rpm affine in speed and throttle, sampled every 0.2
// time units on [0, 30] (151 samples).
struct AtParams {
  double throttle_gain = 0.12;     // mph/s per throttle unit
  double brake_gain = 0.02;        // mph/s per brake unit
  double drag = 0.08;              // 1/s
  double rpm_idle = 800.0;
  double rpm_per_speed = 5.0;
  double rpm_per_throttle = 12.0;
};

class AtSurrogateSut final : public Sut {
 public:
  explicit AtSurrogateSut(AtParams params = {});

  std::string name() const override { return "at-surrogate"; }
  int input_dim() const override { return 12; }
  int requirement_count() const override { return 3; }
  std::span<const Range> ranges() const override;
  // rho_1..rho_3: at_robustness with (bound, horizon) = (35,4), (50,8), (65,20).
  std::vector<double> execute(std::span<const double> normalized) override;

  // The RPM/SPEED signal pair the robustness values are computed from.
  stl::Signal simulate(std::span<const double> normalized) const;

 private:
  AtParams params_;
  std::vector<Range> ranges_;
};

// Registry for CLI selection; new systems can be added at startup.
void register_sut(const std::string& name, std::function<std::unique_ptr<Sut>()> factory);
std::unique_ptr<Sut> make_sut(const std::string& name);  // throws on unknown name
std::vector<std::string> registered_suts();

}  // namespace falsify::suts
