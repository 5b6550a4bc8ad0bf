// Copyright 2026 The motiondepth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdepth/loss_metrics.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mdepth/ops.hpp"

namespace mdepth {

double level_weight(int index, int num_levels, const LossConventions& conv) {
  const int l = conv.finest_level_is_one ? index + 1 : num_levels - index;
  return std::ldexp(1.0, l + 1);
}

template <typename T>
double frame_loss_log(std::span<const BasicTensor<T>> log_estimates, const BasicTensor<T>& gt,
                      const LossWeights& w, const LossConventions& conv,
                      std::vector<BasicTensor<T>>* grad_log_estimates) {
  if (log_estimates.empty()) throw Error(ErrorKind::kInvalidArgument, "no estimates");
  if (gt.channels() != 1) throw Error(ErrorKind::kShapeMismatch, "ground truth must be 1 channel");
  const int m = static_cast<int>(log_estimates.size());
  if (grad_log_estimates) grad_log_estimates->clear();
  double total = 0.0;
  for (int idx = 0; idx < m; ++idx) {
    const auto& est = log_estimates[idx];
    if (est.channels() != 1) throw Error(ErrorKind::kShapeMismatch, "estimate must be 1 channel");
    const BasicTensor<T> gt_level =
        est.height() == gt.height() && est.width() == gt.width()
            ? gt
            : resize_bilinear(gt, est.height(), est.width());
    const double norm = conv.per_level_normalization
                            ? static_cast<double>(est.size())
                            : static_cast<double>(gt.size());
    const double scale = w.alpha * level_weight(idx, m, conv) / norm;
    double sum = 0.0;
    BasicTensor<T> grad;
    if (grad_log_estimates) grad = BasicTensor<T>(est.shape());
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double g = gt_level[i];
      if (!(g > 0.0)) throw Error(ErrorKind::kCorruptDepth, "ground truth must be positive");
      const double diff = static_cast<double>(est[i]) - std::log(g);
      sum += std::abs(diff);
      if (grad_log_estimates) {
        grad[i] = static_cast<T>(diff > 0.0 ? scale : (diff < 0.0 ? -scale : 0.0));
      }
    }
    total += scale * sum;
    if (grad_log_estimates) grad_log_estimates->push_back(std::move(grad));
  }
  return total;
}

template <typename T>
double frame_loss(std::span<const BasicTensor<T>> estimates, const BasicTensor<T>& gt,
                  const LossWeights& w, const LossConventions& conv) {
  std::vector<BasicTensor<T>> logs;
  logs.reserve(estimates.size());
  for (const auto& e : estimates) {
    BasicTensor<T> l(e.shape());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!(e[i] > T(0))) throw Error(ErrorKind::kNonPositiveDepth, "estimate must be positive");
      l[i] = static_cast<T>(std::log(static_cast<double>(e[i])));
    }
    logs.push_back(std::move(l));
  }
  return frame_loss_log<T>(logs, gt, w, conv, nullptr);
}

template <typename T>
double weight_penalty(std::span<const BasicParamTensor<T>* const> params, double gamma) {
  double sum = 0.0;
  for (const auto* p : params) {
    if (p->is_bias) continue;
    for (T v : p->value.values()) sum += static_cast<double>(v) * static_cast<double>(v);
  }
  return gamma * sum;
}

template <typename T>
void add_weight_penalty_grad(std::span<BasicParamTensor<T>* const> params, double gamma) {
  const T scale = static_cast<T>(2.0 * gamma);
  for (auto* p : params) {
    if (p->is_bias) continue;
    for (std::size_t i = 0; i < p->numel(); ++i) p->grad[i] += scale * p->value[i];
  }
}

template <typename T>
double total_loss(std::span<const double> frame_losses,
                  std::span<const BasicParamTensor<T>* const> params, const LossWeights& w) {
  if (frame_losses.empty()) throw Error(ErrorKind::kInvalidArgument, "no frame losses");
  double sum = 0.0;
  for (double v : frame_losses) sum += v;
  return sum / static_cast<double>(frame_losses.size()) + weight_penalty<T>(params, w.gamma);
}

std::string MetricReport::csv_header() { return "abs_rel,sq_rel,rmse,rmse_log,d1,d2,d3"; }

std::string MetricReport::csv_row() const {
  std::ostringstream os;
  const double v[] = {abs_rel, sq_rel, rmse, rmse_log, delta1, delta2, delta3};
  for (int i = 0; i < 7; ++i) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v[i]);
    if (i) os << ',';
    os << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
  }
  return os.str();
}

MetricReport MetricReport::from_csv_row(const std::string& row) {
  double v[7];
  const char* p = row.data();
  const char* end = row.data() + row.size();
  for (int i = 0; i < 7; ++i) {
    const auto res = std::from_chars(p, end, v[i]);
    if (res.ec != std::errc()) throw Error(ErrorKind::kBadFormat, "metric row: " + row);
    p = res.ptr;
    if (i < 6) {
      if (p == end || *p != ',') throw Error(ErrorKind::kBadFormat, "metric row: " + row);
      ++p;
    }
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

template <typename T>
MetricReport eigen_metrics(const BasicTensor<T>& est, const BasicTensor<T>& gt,
                           const BasicTensor<T>* valid_mask) {
  require_shape(est.shape(), gt.shape(), "eigen_metrics");
  if (valid_mask) require_shape(valid_mask->shape(), gt.shape(), "eigen_metrics mask");
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::size_t n = 0, c1 = 0, c2 = 0, c3 = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double g = gt[i];
    const bool valid = valid_mask ? (*valid_mask)[i] != T(0) : (std::isfinite(g) && g > 0.0);
    if (!valid) continue;
    const double e = est[i];
    if (!(e > 0.0) || !(g > 0.0)) {
      throw Error(ErrorKind::kNonPositiveDepth, "eigen_metrics needs positive depths");
    }
    const double diff = e - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double dl = std::log(e) - std::log(g);
    sq_log += dl * dl;
    const double ratio = std::max(e / g, g / e);
    c1 += ratio < t1;
    c2 += ratio < t2;
    c3 += ratio < t3;
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::kEmptyMask, "no valid pixels to score");
  const double dn = static_cast<double>(n);
  return {abs_rel / dn, sq_rel / dn, std::sqrt(sq / dn), std::sqrt(sq_log / dn),
          static_cast<double>(c1) / dn, static_cast<double>(c2) / dn,
          static_cast<double>(c3) / dn};
}

MetricReport mean_report(std::span<const MetricReport> reports) {
  MetricReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.abs_rel += r.abs_rel;
    m.sq_rel += r.sq_rel;
    m.rmse += r.rmse;
    m.rmse_log += r.rmse_log;
    m.delta1 += r.delta1;
    m.delta2 += r.delta2;
    m.delta3 += r.delta3;
  }
  const double n = static_cast<double>(reports.size());
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse /= n;
  m.rmse_log /= n;
  m.delta1 /= n;
  m.delta2 /= n;
  m.delta3 /= n;
  return m;
}

void print_metric_table(std::ostream& os,
                        std::span<const std::pair<std::string, MetricReport>> rows) {
  std::size_t name_w = 6;
  for (const auto& [name, r] : rows) name_w = std::max(name_w, name.size());
  const auto rule = [&] { os << std::string(name_w + 2 + 7 * 11, '-') << '\n'; };
  rule();
  os << std::left << std::setw(static_cast<int>(name_w) + 2) << "Method" << std::right;
  for (const char* h : {"Abs Rel", "Sq Rel", "RMSE", "RMSE log", "d<1.25", "d<1.25^2", "d<1.25^3"}) {
    os << std::setw(11) << h;
  }
  os << '\n';
  rule();
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << name << std::right << std::fixed
       << std::setprecision(4);
    for (double v : {r.abs_rel, r.sq_rel, r.rmse, r.rmse_log, r.delta1, r.delta2, r.delta3}) {
      os << std::setw(11) << v;
    }
    os << '\n';
  }
  rule();
  os.unsetf(std::ios::floatfield);
}

#define MDEPTH_INSTANTIATE_LOSS(T)                                                                 \
  template double frame_loss_log<T>(std::span<const BasicTensor<T>>, const BasicTensor<T>&,        \
                                    const LossWeights&, const LossConventions&,                    \
                                    std::vector<BasicTensor<T>>*);                                 \
  template double frame_loss<T>(std::span<const BasicTensor<T>>, const BasicTensor<T>&,            \
                                const LossWeights&, const LossConventions&);                       \
  template double weight_penalty<T>(std::span<const BasicParamTensor<T>* const>, double);          \
  template void add_weight_penalty_grad<T>(std::span<BasicParamTensor<T>* const>, double);         \
  template double total_loss<T>(std::span<const double>,                                           \
                                std::span<const BasicParamTensor<T>* const>, const LossWeights&);  \
  template MetricReport eigen_metrics<T>(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                         const BasicTensor<T>*);

MDEPTH_INSTANTIATE_LOSS(float)
MDEPTH_INSTANTIATE_LOSS(double)

#undef MDEPTH_INSTANTIATE_LOSS

}  // namespace mdepth
