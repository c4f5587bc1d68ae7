#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace anw::app {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

CheckResult check_degradation_algebra();
CheckResult check_warp_roundtrip();
CheckResult check_noise_statistics();
CheckResult check_motion_transport();
CheckResult check_downsampling();
CheckResult check_gradients();
CheckResult check_sampler();
CheckResult check_schedule_and_codec();

/// Every property group in a fixed order; `on_result` sees each as it
/// finishes.
std::vector<CheckResult> run_self_check(const std::function<void(const CheckResult&)>& on_result = {});

void print_result(std::ostream& os, const CheckResult& r);

}  // namespace anw::app
