#pragma once
// Persistent change filters. Each filter measures how long a series of values
// in [0,1] has persistently sat high (jump accumulator p) net of how long it
// has sat low (drop accumulator q):
//
//   D0  terminal run of ones in a binary series (the handcrafted feature)
//   D1  continuous relaxation            p <- x + x*p
//   D2  symmetric two-accumulator form   D = p - q, q run on the complement
//   D3  smoothed form with parameter k   p <- x  + k*(x*p)  + (1-k)*p
//                                        q <- xc + k*(xc*q) + (1-k)*q
//
// k in [0,1] controls how strongly a single low observation resets the
// accumulated run; k=1 reproduces D2 bit for bit (the evaluation order above
// is chosen so that this holds exactly in floating point, not just in math).

#include <cstddef>
#include <span>
#include <vector>

namespace pcfnet {

// Series of values in [0,1]; non-empty, validated on construction.
class TimeSeriesWindow {
 public:
  explicit TimeSeriesWindow(std::vector<double> values);
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

// Smoothing parameter k in [0,1].
class SmoothingParam {
 public:
  explicit SmoothingParam(double k);
  double value() const { return k_; }

 private:
  double k_;
};

// D0: length of the terminal run of ones. Requires every entry to be exactly
// 0 or 1; rejects otherwise, naming the first offending index.
int naive_persistent_change(const TimeSeriesWindow& x);

// D1: jump accumulator alone. Equals D0 exactly on binary input.
double continuous_persistent_change(const TimeSeriesWindow& x);

// D2: jump accumulator minus the mirrored drop accumulator on 1-x.
double symmetric_persistent_change(const TimeSeriesWindow& x);

// D3: the smoothed filter (the one the network trains through).
double smooth_persistent_change(const TimeSeriesWindow& x, SmoothingParam k);

// Terminal value of the smoothed jump accumulator p alone. On binary series
// p_T(1) equals D0 exactly and |p_T(k) - D0| shrinks monotonically in k.
double smooth_jump_total(const TimeSeriesWindow& x, SmoothingParam k);

// Running filter values z_t = p_t - q_t for every prefix, one O(T) pass.
std::vector<double> filter_series(const TimeSeriesWindow& x, SmoothingParam k);

struct FilterGradient {
  std::vector<double> wrt_input;  // d(upstream*D3)/dx_t
  double wrt_k = 0.0;             // d(upstream*D3)/dk
};

// Exact reverse-mode gradient of upstream * D3(x, k).
FilterGradient smooth_filter_gradient(const TimeSeriesWindow& x, SmoothingParam k,
                                      double upstream = 1.0);

namespace detail {

// Core smoothed recursion over explicit (value, complement) input pairs. The
// network feeds sigmoid pairs through this so that negating a channel's
// preactivations swaps the two accumulators bit for bit (sign-flip gauge).
// Returns p_T - q_T; when the trace spans are non-empty (size T) both
// accumulators are recorded at every step for the reverse pass.
double pcf_forward(std::span<const double> x, std::span<const double> xc, double k,
                   std::span<double> p_trace = {}, std::span<double> q_trace = {});

// Reverse pass matching pcf_forward: writes d(upstream*D)/dx_t into gx and
// d(upstream*D)/dxc_t into gxc, returns d(upstream*D)/dk. The q-chain local
// multiplier is 1 + k*(xc - 1) because x and xc are independent inputs here.
double pcf_backward(std::span<const double> x, std::span<const double> xc, double k,
                    std::span<const double> p_trace, std::span<const double> q_trace,
                    double upstream, std::span<double> gx, std::span<double> gxc);

}  // namespace detail
}  // namespace pcfnet
