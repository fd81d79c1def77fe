#pragma once

#include <vector>

namespace cmtest {

struct Ieee30Branch {
  int from;
  int to;
  double x;
  double rating;
};

// IEEE 30-bus topology (1-based bus numbers), reactances in p.u., ratings MW.
inline const std::vector<Ieee30Branch>& Ieee30Branches() {
  static const std::vector<Ieee30Branch> kBranches = {
      {1, 2, 0.0575, 130},  {1, 3, 0.1652, 130},  {2, 4, 0.1737, 65},
      {3, 4, 0.0379, 130},  {2, 5, 0.1983, 130},  {2, 6, 0.1763, 65},
      {4, 6, 0.0414, 90},   {5, 7, 0.1160, 70},   {6, 7, 0.0820, 130},
      {6, 8, 0.0420, 32},   {6, 9, 0.2080, 65},   {6, 10, 0.5560, 32},
      {9, 11, 0.2080, 65},  {9, 10, 0.1100, 65},  {4, 12, 0.2560, 65},
      {12, 13, 0.1400, 65}, {12, 14, 0.2559, 32}, {12, 15, 0.1304, 32},
      {12, 16, 0.1987, 32}, {14, 15, 0.1997, 16}, {16, 17, 0.1923, 16},
      {15, 18, 0.2185, 16}, {18, 19, 0.1292, 16}, {19, 20, 0.0680, 32},
      {10, 20, 0.2090, 32}, {10, 17, 0.0845, 32}, {10, 21, 0.0749, 32},
      {10, 22, 0.1499, 32}, {21, 22, 0.0236, 32}, {15, 23, 0.2020, 16},
      {22, 24, 0.1790, 16}, {23, 24, 0.2700, 16}, {24, 25, 0.3292, 16},
      {25, 26, 0.3800, 16}, {25, 27, 0.2087, 16}, {28, 27, 0.3960, 65},
      {27, 29, 0.4153, 16}, {27, 30, 0.6027, 16}, {29, 30, 0.4533, 16},
      {8, 28, 0.2000, 32},  {6, 28, 0.0599, 32},
  };
  return kBranches;
}

}  // namespace cmtest
