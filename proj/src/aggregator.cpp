#include "hspim/aggregator.hpp"

#include <algorithm>
#include <cmath>

#include "hspim/errors.hpp"

namespace hspim {

std::string norm_name(Norm n) {
    switch (n) {
        case Norm::L1: return "l1";
        case Norm::L2: return "l2";
        case Norm::Linf: return "linf";
    }
    return "l1";
}

Norm norm_from_name(const std::string& name) {
    if (name == "l1" || name == "L1") return Norm::L1;
    if (name == "l2" || name == "L2") return Norm::L2;
    if (name == "linf" || name == "Linf" || name == "LINF") return Norm::Linf;
    throw UsageError("unknown norm: " + name + " (expected l1, l2, or linf)");
}

void AggregationConfig::validate() const {
    if (section_mask) {
        if (section_mask->empty())
            throw UsageError("section mask must not be empty when present");
        if (section_mask->count(SectionType::Unmatched))
            throw UsageError("section mask cannot include Unmatched");
    }
}

double weighted_innovation(std::span<const ChunkScore> scores, bool use_weights) {
    if (scores.empty())
        throw AggregationError("weighted innovation over an empty score list");
    if (!use_weights) {
        double sum = 0.0;
        for (const auto& s : scores) sum += s.novelty;
        return sum / static_cast<double>(scores.size());
    }
    double num = 0.0, den = 0.0;
    for (const auto& s : scores) {
        if (s.confidence <= 0.0)
            throw AggregationError("non-positive confidence weight: " +
                                   std::to_string(s.confidence));
        num += s.confidence * s.novelty;
        den += s.confidence;
    }
    if (den <= 0.0) throw AggregationError("total confidence is not positive");
    return num / den;
}

AttributeVector attribute_means(std::span<const ChunkScorePlus> scores) {
    if (scores.empty())
        throw AggregationError("attribute means over an empty score list");
    double nn = 0.0, nd = 0.0;
    double cn = 0.0, cd = 0.0;
    double fn = 0.0, fd = 0.0;
    for (const auto& s : scores) {
        if (s.conf_novelty <= 0.0 || s.conf_contribution <= 0.0 || s.conf_feasibility <= 0.0)
            throw AggregationError("non-positive confidence weight in attribute means");
        nn += s.conf_novelty * s.novelty;
        nd += s.conf_novelty;
        cn += s.conf_contribution * s.contribution;
        cd += s.conf_contribution;
        fn += s.conf_feasibility * s.feasibility;
        fd += s.conf_feasibility;
    }
    return AttributeVector{nn / nd, cn / cd, fn / fd};
}

double pnorm_map(const AttributeVector& v, Norm norm) {
    // closed-form extrema over [1,5]^3, evaluated through the same expression
    // as the norm itself so the corner vectors map to exactly 1.0 and 5.0
    auto norm_of = [norm](double a, double b, double c) {
        switch (norm) {
            case Norm::L1: return a + b + c;
            case Norm::L2: return std::sqrt(a * a + b * b + c * c);
            case Norm::Linf: return std::max({a, b, c});
        }
        return a + b + c;
    };
    double value = norm_of(v.novelty, v.contribution, v.feasibility);
    double x_min = norm_of(1.0, 1.0, 1.0);
    double x_max = norm_of(5.0, 5.0, 5.0);
    return 1.0 + 4.0 * (value - x_min) / (x_max - x_min);
}

namespace {

bool mask_keeps(const AggregationConfig& config, SectionType t) {
    if (!config.section_mask) return true;
    return config.section_mask->count(t) > 0;
}

}  // namespace

double aggregate(std::span<const ScoredChunk> records, const AggregationConfig& config) {
    config.validate();
    if (config.mode != ScoreMode::hspim)
        throw AggregationError("single-attribute records require mode hspim");
    std::vector<ChunkScore> kept;
    for (const auto& r : records)
        if (mask_keeps(config, r.section_type)) kept.push_back(r.score);
    if (kept.empty())
        throw AggregationError("no surviving chunks after section mask");
    return weighted_innovation(kept, config.use_confidence_weights);
}

double aggregate(std::span<const ScoredChunkPlus> records, const AggregationConfig& config) {
    config.validate();
    if (config.mode != ScoreMode::hspim_plus)
        throw AggregationError("three-attribute records require mode hspim_plus");
    std::vector<ChunkScorePlus> kept;
    for (const auto& r : records)
        if (mask_keeps(config, r.section_type)) kept.push_back(r.score);
    if (kept.empty())
        throw AggregationError("no surviving chunks after section mask");
    if (!config.use_confidence_weights) {
        // ablation: all confidence channels pinned to 1
        for (auto& s : kept) {
            s.conf_novelty = 1.0;
            s.conf_contribution = 1.0;
            s.conf_feasibility = 1.0;
        }
    }
    return pnorm_map(attribute_means(kept), config.norm);
}

}  // namespace hspim
