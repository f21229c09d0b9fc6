#include "netctl/precision.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "netctl/error.hpp"
#include "netctl/parallel.hpp"

namespace netctl {

void PrecisionConfig::validate() const {
  if (digits < 16 || digits > kMaxDigits) {
    throw ConfigError("precision digits must lie in [16, " + std::to_string(kMaxDigits) +
                      "], got " + std::to_string(digits));
  }
}

template <typename Scalar>
std::string to_decimal_string(const Scalar& x, int digits) {
  if constexpr (std::is_same_v<Scalar, double>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", std::max(0, std::min(digits, 17) - 1), x);
    return buf;
  } else {
    const int shown = std::max(1, std::min(digits, scalar_digits10<Scalar>()));
    return x.str(shown, std::ios_base::scientific);
  }
}

#define NETCTL_INSTANTIATE(S) template std::string to_decimal_string<S>(const S&, int);
NETCTL_FOR_EACH_SCALAR(NETCTL_INSTANTIATE)
#undef NETCTL_INSTANTIATE

int default_workers() {
  if (const char* env = std::getenv("NETCTL_WORKERS")) {
    const int k = std::atoi(env);
    if (k > 0) return k;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace netctl
