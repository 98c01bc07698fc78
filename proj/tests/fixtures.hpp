#pragma once

#include <vector>

namespace fixture {

/// p_i = i / 20 for i = 1..19: exactly the null order-statistic means.
inline std::vector<double> uniform_grid() {
  std::vector<double> p;
  for (int i = 1; i <= 19; ++i) p.push_back(i / 20.0);
  return p;
}

/// 20 p-values on a shallow line, all at most 0.01.
inline std::vector<double> all_small() {
  std::vector<double> p;
  for (int i = 1; i <= 20; ++i) p.push_back(0.0005 * i);
  return p;
}

/// Ten hacked-looking p-values 0.001 * i followed by twenty evenly spaced
/// null-looking ones 0.05 + 0.95 * j / 21.
inline std::vector<double> mixture() {
  std::vector<double> p;
  for (int i = 1; i <= 10; ++i) p.push_back(0.001 * i);
  for (int j = 1; j <= 20; ++j) p.push_back(0.05 + 0.95 * j / 21.0);
  return p;
}

}  // namespace fixture
