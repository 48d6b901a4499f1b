#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dicnet {

/// A metric value together with how many rows (or label columns) were
/// skipped because they were degenerate.
struct MetricValue {
  double value = 0.0;
  std::size_t skipped = 0;
};

/// Example-based average precision. Labels are ranked by descending score,
/// ties broken by ascending label index. Samples without positives are
/// skipped.
MetricValue average_precision(const Matrix& scores, const Matrix& truth);

/// Example-based ranking loss: fraction of (positive, negative) label pairs
/// where the positive does not score higher, ties counting 1/2. Samples that
/// lack a positive or a negative are skipped.
MetricValue ranking_loss(const Matrix& scores, const Matrix& truth);

/// Fraction of cells where the binary prediction differs from the truth.
double hamming_loss(const Matrix& binary_predictions, const Matrix& truth);

/// Macro average over labels of the rank-statistic ROC AUC (ties 1/2).
/// Labels without a positive or without a negative sample are skipped.
MetricValue auc_adapted(const Matrix& scores, const Matrix& truth);

/// Headline values of one run: AP, 1-HL, 1-RL, AUC.
struct EvalReport {
  double average_precision = 0.0;
  double one_minus_hamming = 0.0;
  double one_minus_ranking = 0.0;
  double auc = 0.0;
  std::size_t n_test = 0;
  std::size_t c = 0;
  std::size_t ap_skipped = 0;
  std::size_t rl_skipped = 0;
  std::size_t auc_skipped = 0;

  std::string to_json() const;
};

EvalReport evaluate_all(const Matrix& scores, const Matrix& binary_predictions,
                        const Matrix& truth);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single run
  std::vector<double> values;
};

MetricSummary summarize(const std::vector<double>& values);

/// Mean +- sample std of every metric over repeated runs.
struct AggregateReport {
  std::vector<std::uint64_t> seeds;
  MetricSummary average_precision;
  MetricSummary one_minus_hamming;
  MetricSummary one_minus_ranking;
  MetricSummary auc;

  std::string to_json() const;
};

AggregateReport aggregate(const std::vector<EvalReport>& runs,
                          const std::vector<std::uint64_t>& seeds);

}  // namespace dicnet
