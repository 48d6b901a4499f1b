#include "dicnet/metrics/metrics.hpp"

#include "dicnet/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "metrics";

void check_pair(const Matrix& scores, const Matrix& truth) {
  if (shape_of(scores) != shape_of(truth)) {
    throw ShapeError(kModule, "scores " + to_string(shape_of(scores)) + " vs truth " +
                                  to_string(shape_of(truth)));
  }
  if (!is_binary(truth)) throw ValidationError(kModule, "truth must be 0/1");
}

nlohmann::json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"values", s.values}};
}

}  // namespace

MetricValue average_precision(const Matrix& scores, const Matrix& truth) {
  check_pair(scores, truth);
  const Eigen::Index c = scores.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
  double total = 0.0;
  MetricValue out;
  std::size_t scored = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return scores(i, a) > scores(i, b);
    });
    double precision_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (truth(i, order[rank]) == 1.0) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
      }
    }
    if (hits == 0) {
      ++out.skipped;
      continue;
    }
    total += precision_sum / static_cast<double>(hits);
    ++scored;
  }
  if (scored == 0) throw ValidationError(kModule, "average precision: every sample lacks a positive label");
  out.value = total / static_cast<double>(scored);
  return out;
}

MetricValue ranking_loss(const Matrix& scores, const Matrix& truth) {
  check_pair(scores, truth);
  MetricValue out;
  double total = 0.0;
  std::size_t scored = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    double bad = 0.0;
    std::size_t pos = 0, neg = 0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      (truth(i, j) == 1.0 ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) {
      ++out.skipped;
      continue;
    }
    for (Eigen::Index a = 0; a < scores.cols(); ++a) {
      if (truth(i, a) != 1.0) continue;
      for (Eigen::Index b = 0; b < scores.cols(); ++b) {
        if (truth(i, b) != 0.0) continue;
        if (scores(i, a) < scores(i, b)) {
          bad += 1.0;
        } else if (scores(i, a) == scores(i, b)) {
          bad += 0.5;
        }
      }
    }
    total += bad / static_cast<double>(pos * neg);
    ++scored;
  }
  if (scored == 0) throw ValidationError(kModule, "ranking loss: every sample is degenerate");
  out.value = total / static_cast<double>(scored);
  return out;
}

double hamming_loss(const Matrix& binary_predictions, const Matrix& truth) {
  check_pair(binary_predictions, truth);
  if (!is_binary(binary_predictions)) {
    throw ValidationError(kModule, "hamming loss needs 0/1 predictions");
  }
  if (truth.size() == 0) throw ValidationError(kModule, "hamming loss of empty matrices");
  const auto wrong = (binary_predictions.array() != truth.array()).count();
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

MetricValue auc_adapted(const Matrix& scores, const Matrix& truth) {
  check_pair(scores, truth);
  MetricValue out;
  double total = 0.0;
  std::size_t scored = 0;
  const Eigen::Index n = scores.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<double> ranks(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores(a, j) < scores(b, j); });
    // Mid-ranks (1-based) so ties contribute 1/2 per pair.
    for (std::size_t k = 0; k < order.size();) {
      std::size_t end = k;
      while (end < order.size() && scores(order[end], j) == scores(order[k], j)) ++end;
      const double mid = 0.5 * static_cast<double>(k + 1 + end);
      for (std::size_t t = k; t < end; ++t) ranks[static_cast<std::size_t>(order[t])] = mid;
      k = end;
    }
    double rank_sum = 0.0;
    double pos = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (truth(i, j) == 1.0) {
        rank_sum += ranks[static_cast<std::size_t>(i)];
        pos += 1.0;
      }
    }
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0) {
      ++out.skipped;
      continue;
    }
    total += (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
    ++scored;
  }
  if (scored == 0) throw ValidationError(kModule, "AUC: every label is degenerate");
  out.value = total / static_cast<double>(scored);
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j = {{"ap", average_precision},        {"one_minus_hl", one_minus_hamming},
                      {"one_minus_rl", one_minus_ranking}, {"auc", auc},
                      {"n_test", n_test},               {"c", c},
                      {"ap_skipped", ap_skipped},       {"rl_skipped", rl_skipped},
                      {"auc_skipped", auc_skipped}};
  return j.dump();
}

EvalReport evaluate_all(const Matrix& scores, const Matrix& binary_predictions,
                        const Matrix& truth) {
  EvalReport r;
  const MetricValue ap = average_precision(scores, truth);
  const MetricValue rl = ranking_loss(scores, truth);
  const MetricValue auc = auc_adapted(scores, truth);
  r.average_precision = ap.value;
  r.one_minus_ranking = 1.0 - rl.value;
  r.one_minus_hamming = 1.0 - hamming_loss(binary_predictions, truth);
  r.auc = auc.value;
  r.ap_skipped = ap.skipped;
  r.rl_skipped = rl.skipped;
  r.auc_skipped = auc.skipped;
  r.n_test = static_cast<std::size_t>(truth.rows());
  r.c = static_cast<std::size_t>(truth.cols());
  return r;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.values = values;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(const std::vector<EvalReport>& runs,
                          const std::vector<std::uint64_t>& seeds) {
  if (runs.empty()) throw ValidationError(kModule, "nothing to aggregate");
  if (!seeds.empty() && seeds.size() != runs.size()) {
    throw ValidationError(kModule, "seed list and run list differ in length");
  }
  std::vector<double> ap, hl, rl, auc;
  for (const EvalReport& r : runs) {
    ap.push_back(r.average_precision);
    hl.push_back(r.one_minus_hamming);
    rl.push_back(r.one_minus_ranking);
    auc.push_back(r.auc);
  }
  return {seeds, summarize(ap), summarize(hl), summarize(rl), summarize(auc)};
}

std::string AggregateReport::to_json() const {
  nlohmann::json j = {{"seeds", seeds},
                      {"ap", summary_json(average_precision)},
                      {"one_minus_hl", summary_json(one_minus_hamming)},
                      {"one_minus_rl", summary_json(one_minus_ranking)},
                      {"auc", summary_json(auc)}};
  return j.dump();
}

}  // namespace dicnet
