#include "pcfnet/filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pcfnet {

TimeSeriesWindow::TimeSeriesWindow(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::invalid_argument("time series window must be non-empty");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double v = values_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("time series value out of [0,1] at index " +
                                  std::to_string(i) + ": " + std::to_string(v));
    }
  }
}

SmoothingParam::SmoothingParam(double k) : k_(k) {
  if (!(k >= 0.0 && k <= 1.0)) {
    throw std::invalid_argument("smoothing parameter must lie in [0,1], got " +
                                std::to_string(k));
  }
}

int naive_persistent_change(const TimeSeriesWindow& x) {
  auto v = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) {
      throw std::invalid_argument("naive filter needs a binary series; entry at index " +
                                  std::to_string(i) + " is " + std::to_string(v[i]));
    }
  }
  int run = 0;
  for (std::size_t i = v.size(); i-- > 0;) {
    if (v[i] == 1.0) {
      ++run;
    } else {
      break;
    }
  }
  return run;
}

double continuous_persistent_change(const TimeSeriesWindow& x) {
  auto v = x.values();
  double p = v[0];
  for (std::size_t t = 1; t < v.size(); ++t) {
    p = v[t] + v[t] * p;
  }
  return p;
}

double symmetric_persistent_change(const TimeSeriesWindow& x) {
  auto v = x.values();
  double p = v[0];
  double q = 1.0 - v[0];
  for (std::size_t t = 1; t < v.size(); ++t) {
    const double xt = v[t];
    const double xc = 1.0 - xt;
    p = xt + xt * p;
    q = xc + xc * q;
  }
  return p - q;
}

namespace detail {

double pcf_forward(std::span<const double> x, std::span<const double> xc, double k,
                   std::span<double> p_trace, std::span<double> q_trace) {
  const std::size_t T = x.size();
  const double om = 1.0 - k;  // exactly 0.0 at k=1, which makes D3(.,1) == D2
  const bool trace = !p_trace.empty();
  double p = x[0];
  double q = xc[0];
  if (trace) {
    p_trace[0] = p;
    q_trace[0] = q;
  }
  for (std::size_t t = 1; t < T; ++t) {
    p = x[t] + k * (x[t] * p) + om * p;
    q = xc[t] + k * (xc[t] * q) + om * q;
    if (trace) {
      p_trace[t] = p;
      q_trace[t] = q;
    }
  }
  return p - q;
}

double pcf_backward(std::span<const double> x, std::span<const double> xc, double k,
                    std::span<const double> p_trace, std::span<const double> q_trace,
                    double upstream, std::span<double> gx, std::span<double> gxc) {
  const std::size_t T = x.size();
  double gp = upstream;
  double gq = -upstream;
  double gk = 0.0;
  for (std::size_t t = T; t-- > 1;) {
    const double p_prev = p_trace[t - 1];
    const double q_prev = q_trace[t - 1];
    gx[t] = gp * (1.0 + k * p_prev);
    gxc[t] = gq * (1.0 + k * q_prev);
    gk += gp * ((x[t] - 1.0) * p_prev) + gq * ((xc[t] - 1.0) * q_prev);
    gp = gp * (1.0 + k * (x[t] - 1.0));
    gq = gq * (1.0 + k * (xc[t] - 1.0));
  }
  gx[0] = gp;
  gxc[0] = gq;
  return gk;
}

}  // namespace detail

double smooth_persistent_change(const TimeSeriesWindow& x, SmoothingParam k) {
  auto v = x.values();
  std::vector<double> xc(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) xc[t] = 1.0 - v[t];
  return detail::pcf_forward(v, xc, k.value());
}

double smooth_jump_total(const TimeSeriesWindow& x, SmoothingParam k) {
  auto v = x.values();
  const double kk = k.value();
  const double om = 1.0 - kk;
  double p = v[0];
  for (std::size_t t = 1; t < v.size(); ++t) {
    p = v[t] + kk * (v[t] * p) + om * p;
  }
  return p;
}

std::vector<double> filter_series(const TimeSeriesWindow& x, SmoothingParam k) {
  auto v = x.values();
  const double kk = k.value();
  const double om = 1.0 - kk;
  std::vector<double> z(v.size());
  double p = v[0];
  double q = 1.0 - v[0];
  z[0] = p - q;
  for (std::size_t t = 1; t < v.size(); ++t) {
    const double xt = v[t];
    const double xct = 1.0 - xt;
    p = xt + kk * (xt * p) + om * p;
    q = xct + kk * (xct * q) + om * q;
    z[t] = p - q;
  }
  return z;
}

FilterGradient smooth_filter_gradient(const TimeSeriesWindow& x, SmoothingParam k,
                                      double upstream) {
  auto v = x.values();
  const std::size_t T = v.size();
  std::vector<double> xc(T);
  for (std::size_t t = 0; t < T; ++t) xc[t] = 1.0 - v[t];

  std::vector<double> p_trace(T), q_trace(T);
  detail::pcf_forward(v, xc, k.value(), p_trace, q_trace);

  std::vector<double> gx(T), gxc(T);
  FilterGradient grad;
  grad.wrt_k = detail::pcf_backward(v, xc, k.value(), p_trace, q_trace, upstream, gx, gxc);
  grad.wrt_input.resize(T);
  // xc_t = 1 - x_t, so the complement channel contributes with flipped sign.
  for (std::size_t t = 0; t < T; ++t) grad.wrt_input[t] = gx[t] - gxc[t];
  return grad;
}

}  // namespace pcfnet
