#pragma once

#include <string>
#include <vector>

#include "hcod/image.hpp"

namespace hcod {

inline constexpr double kFBeta2 = 0.3;
inline constexpr double kStructureAlpha = 0.5;

double mae(const SaliencyMap& pred, const Mask& gt);

// Binarization at t = min(2 mean(pred), 1), positive where pred >= t. A
// prediction with zero mean binarizes to the empty mask.
Mask adaptive_binarize(const SaliencyMap& pred);

// F_beta of the adaptive binarization. TP = 0 gives 0, except that an empty
// prediction against an empty ground truth gives 1.
double adaptive_fmeasure(const SaliencyMap& pred, const Mask& gt, double beta2 = kFBeta2);

// Enhanced alignment of the adaptive binarization. All-zero ground truth
// scores 1 - mean(S_bin), all-one scores mean(S_bin).
double e_measure(const SaliencyMap& pred, const Mask& gt);

// Structure measure alpha * S_object + (1 - alpha) * S_region in [0, 1].
// All-zero ground truth scores 1 - mean(pred), all-one scores mean(pred).
double s_measure(const SaliencyMap& pred, const Mask& gt, double alpha = kStructureAlpha);

struct MetricScores {
    double mae = 0.0;
    double adp_f = 0.0;
    double e_measure = 0.0;
    double s_measure = 0.0;
};

MetricScores evaluate_pair(const SaliencyMap& pred, const Mask& gt);

struct MetricReport {
    std::vector<std::string> names;  // empty or one per image
    std::vector<MetricScores> per_image;
    MetricScores mean;
};

struct EvalPair {
    std::string name;
    SaliencyMap pred;
    Mask gt;
};

// Per-pair scores in input order and their arithmetic mean, summed in input
// order. Throws ValidationError on an empty list.
MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs);

// `image,mae,adp_f,e,s` header, one row per image, then a MEAN row; 6 decimals.
std::string metrics_csv(const MetricReport& report);

}  // namespace hcod
