#include "hcod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hcod/errors.hpp"
#include "hcod/parallel.hpp"

namespace hcod {

namespace {

double mean_of(const SaliencyMap& pred) {
    double s = 0.0;
    for (double v : pred.data) {
        s += v;
    }
    return s / static_cast<double>(pred.pixels());
}

// 0 = mixed, -1 = all background, +1 = all foreground.
int degenerate_kind(const Mask& gt) {
    const size_t fg = gt.count();
    if (fg == 0) {
        return -1;
    }
    return fg == gt.pixels() ? 1 : 0;
}

// Mean and population std of the selected values.
struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Denominator is at least 1.
double object_score(double mean, double std) { return 2.0 * mean / (mean * mean + 1.0 + 2.0 * std); }

Moments region_moments(const SaliencyMap& pred, const Mask& gt, uint8_t label, bool invert) {
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        if (gt.data[i] == label) {
            sum += invert ? 1.0 - pred.data[i] : pred.data[i];
            ++n;
        }
    }
    Moments m;
    m.mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        if (gt.data[i] == label) {
            const double d = (invert ? 1.0 - pred.data[i] : pred.data[i]) - m.mean;
            sq += d * d;
        }
    }
    m.std = std::sqrt(sq / static_cast<double>(n));
    return m;
}

double structure_object(const SaliencyMap& pred, const Mask& gt) {
    const double mu = static_cast<double>(gt.count()) / static_cast<double>(gt.pixels());
    const Moments fg = region_moments(pred, gt, 1, false);
    const Moments bg = region_moments(pred, gt, 0, true);
    return mu * object_score(fg.mean, fg.std) + (1.0 - mu) * object_score(bg.mean, bg.std);
}

// SSIM-style similarity of pred and gt over rows [r0, r1) x cols [c0, c1).
double block_ssim(const SaliencyMap& pred, const Mask& gt, int r0, int r1, int c0, int c1) {
    const double n = static_cast<double>(r1 - r0) * (c1 - c0);
    double sx = 0.0;
    double sy = 0.0;
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            sx += pred.at(r, c);
            sy += gt.at(r, c);
        }
    }
    const double mx = sx / n;
    const double my = sy / n;
    double vx = 0.0;
    double vy = 0.0;
    double cxy = 0.0;
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            const double dx = pred.at(r, c) - mx;
            const double dy = gt.at(r, c) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    // The (n - 1) normalisation cancels in alpha / beta. |alpha| <= beta, so a
    // zero beta means both blocks are flat or black: identical structure.
    const double alpha = 4.0 * mx * my * cxy;
    const double beta = (mx * mx + my * my) * (vx + vy);
    return beta > 0.0 ? alpha / beta : 1.0;
}

double structure_region(const SaliencyMap& pred, const Mask& gt) {
    double sr = 0.0;
    double sc = 0.0;
    for (int r = 0; r < gt.height; ++r) {
        for (int c = 0; c < gt.width; ++c) {
            if (gt.at(r, c)) {
                sr += r;
                sc += c;
            }
        }
    }
    const double fg = static_cast<double>(gt.count());
    // Split sizes count the centroid row/column into the top/left blocks.
    const int y = static_cast<int>(std::lround(sr / fg + 1.0));
    const int x = static_cast<int>(std::lround(sc / fg + 1.0));
    const int h = gt.height;
    const int w = gt.width;
    const double area = static_cast<double>(h) * w;

    const int rows[3] = {0, y, h};
    const int cols[3] = {0, x, w};
    double score = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const int r0 = rows[i], r1 = rows[i + 1];
            const int c0 = cols[j], c1 = cols[j + 1];
            if (r1 <= r0 || c1 <= c0) {
                continue;
            }
            const double weight = static_cast<double>(r1 - r0) * (c1 - c0) / area;
            score += weight * block_ssim(pred, gt, r0, r1, c0, c1);
        }
    }
    return score;
}

}  // namespace

double mae(const SaliencyMap& pred, const Mask& gt) {
    require_same_shape(pred, gt, "mae");
    double s = 0.0;
    for (size_t i = 0; i < pred.pixels(); ++i) {
        s += std::abs(pred.data[i] - gt.data[i]);
    }
    return s / static_cast<double>(pred.pixels());
}

Mask adaptive_binarize(const SaliencyMap& pred) {
    Mask out(pred.height, pred.width);
    const double m = mean_of(pred);
    if (m <= 0.0) {
        return out;
    }
    const double t = std::min(2.0 * m, 1.0);
    for (size_t i = 0; i < pred.pixels(); ++i) {
        out.data[i] = pred.data[i] >= t ? 1 : 0;
    }
    return out;
}

double adaptive_fmeasure(const SaliencyMap& pred, const Mask& gt, double beta2) {
    require_same_shape(pred, gt, "adaptive_fmeasure");
    const Mask bin = adaptive_binarize(pred);
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (size_t i = 0; i < bin.pixels(); ++i) {
        tp += bin.data[i] && gt.data[i];
        fp += bin.data[i] && !gt.data[i];
        fn += !bin.data[i] && gt.data[i];
    }
    if (tp == 0.0) {
        return (fp == 0.0 && fn == 0.0) ? 1.0 : 0.0;
    }
    const double p = tp / (tp + fp);
    const double r = tp / (tp + fn);
    return (1.0 + beta2) * p * r / (beta2 * p + r);
}

double e_measure(const SaliencyMap& pred, const Mask& gt) {
    require_same_shape(pred, gt, "e_measure");
    const Mask bin = adaptive_binarize(pred);
    const double n = static_cast<double>(bin.pixels());
    const double mean_s = static_cast<double>(bin.count()) / n;
    switch (degenerate_kind(gt)) {
        case -1:
            return 1.0 - mean_s;
        case 1:
            return mean_s;
        default:
            break;
    }
    const double mean_g = static_cast<double>(gt.count()) / n;
    double acc = 0.0;
    for (size_t i = 0; i < bin.pixels(); ++i) {
        const double ps = bin.data[i] - mean_s;
        const double pg = gt.data[i] - mean_g;
        // pg is never zero for a non-degenerate gt.
        const double xi = 2.0 * ps * pg / (ps * ps + pg * pg);
        acc += (1.0 + xi) * (1.0 + xi) / 4.0;
    }
    return acc / n;
}

double s_measure(const SaliencyMap& pred, const Mask& gt, double alpha) {
    require_same_shape(pred, gt, "s_measure");
    switch (degenerate_kind(gt)) {
        case -1:
            return std::clamp(1.0 - mean_of(pred), 0.0, 1.0);
        case 1:
            return std::clamp(mean_of(pred), 0.0, 1.0);
        default:
            break;
    }
    const double s = alpha * structure_object(pred, gt) + (1.0 - alpha) * structure_region(pred, gt);
    return std::clamp(s, 0.0, 1.0);
}

MetricScores evaluate_pair(const SaliencyMap& pred, const Mask& gt) {
    return {mae(pred, gt), adaptive_fmeasure(pred, gt), e_measure(pred, gt), s_measure(pred, gt)};
}

MetricReport evaluate_dataset(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) {
        throw ValidationError("evaluate_dataset: no prediction/ground-truth pairs");
    }
    MetricReport report;
    report.per_image.resize(pairs.size());
    report.names.reserve(pairs.size());
    for (const auto& p : pairs) {
        report.names.push_back(p.name);
    }
    parallel_for(pairs.size(), [&](size_t i) { report.per_image[i] = evaluate_pair(pairs[i].pred, pairs[i].gt); });
    for (const auto& m : report.per_image) {
        report.mean.mae += m.mae;
        report.mean.adp_f += m.adp_f;
        report.mean.e_measure += m.e_measure;
        report.mean.s_measure += m.s_measure;
    }
    const double n = static_cast<double>(pairs.size());
    report.mean.mae /= n;
    report.mean.adp_f /= n;
    report.mean.e_measure /= n;
    report.mean.s_measure /= n;
    return report;
}

std::string metrics_csv(const MetricReport& report) {
    std::string out = "image,mae,adp_f,e,s\n";
    char buf[160];
    auto row = [&](const std::string& name, const MetricScores& m) {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f\n", m.mae, m.adp_f, m.e_measure, m.s_measure);
        out += name;
        out += buf;
    };
    for (size_t i = 0; i < report.per_image.size(); ++i) {
        row(i < report.names.size() ? report.names[i] : std::to_string(i), report.per_image[i]);
    }
    row("MEAN", report.mean);
    return out;
}

}  // namespace hcod
