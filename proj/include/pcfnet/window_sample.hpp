#pragma once
// One labeled training sample: an m-insurance by s-period block of payment
// amounts. Column 0 is the oldest period, column s-1 the current one, so the
// persistent change filters run oldest-to-newest.

#include <stdexcept>
#include <string>
#include <vector>

namespace pcfnet {

struct WindowSample {
  int m = 0;                     // insurance types (rows)
  int s = 0;                     // periods (columns)
  std::vector<double> payments;  // row-major m x s, non-negative amounts
  int label = 0;                 // 0 or 1

  WindowSample() = default;
  WindowSample(int m_, int s_, std::vector<double> payments_, int label_)
      : m(m_), s(s_), payments(std::move(payments_)), label(label_) {
    if (m <= 0 || s <= 0) throw std::invalid_argument("window sample needs m > 0 and s > 0");
    if (payments.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(s)) {
      throw std::invalid_argument("window sample payment block has wrong size");
    }
    for (double p : payments) {
      if (!(p >= 0.0)) throw std::invalid_argument("window sample payments must be >= 0");
    }
    if (label != 0 && label != 1) {
      throw std::invalid_argument("window sample label must be 0 or 1, got " +
                                  std::to_string(label));
    }
  }

  double at(int insurance, int period) const {
    return payments[static_cast<std::size_t>(insurance) * s + period];
  }
};

}  // namespace pcfnet
