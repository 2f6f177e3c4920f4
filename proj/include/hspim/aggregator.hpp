#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hspim/section_types.hpp"

namespace hspim {

// Single-attribute per-chunk output.
struct ChunkScore {
    double novelty = 0.0;     // in [1,5] after clamping
    double confidence = 0.0;  // in [1,5] after clamping
    std::string reason;
};

// Three-attribute per-chunk output, each with its own confidence channel.
struct ChunkScorePlus {
    double novelty = 0.0;
    double contribution = 0.0;
    double feasibility = 0.0;
    double conf_novelty = 0.0;
    double conf_contribution = 0.0;
    double conf_feasibility = 0.0;
    std::string reason;
};

enum class ScoreMode { hspim, hspim_plus };
enum class Norm { L1, L2, Linf };

std::string norm_name(Norm n);
Norm norm_from_name(const std::string& name);

struct AggregationConfig {
    ScoreMode mode = ScoreMode::hspim;
    Norm norm = Norm::L1;  // hspim_plus only
    std::optional<std::set<SectionType>> section_mask;
    bool use_confidence_weights = true;

    void validate() const;  // mask, when present, non-empty and within the 9 types
};

// Paper-level weighted means of the three attributes.
struct AttributeVector {
    double novelty = 0.0;
    double contribution = 0.0;
    double feasibility = 0.0;
};

// sum(c*n)/sum(c); plain mean when use_weights is false.
double weighted_innovation(std::span<const ChunkScore> scores, bool use_weights = true);

// Three independent confidence-weighted means, one confidence channel each.
AttributeVector attribute_means(std::span<const ChunkScorePlus> scores);

// 1 + 4*(||v||_p - x_min)/(x_max - x_min) with the closed-form extrema of the
// p-norm over [1,5]^3: L1 (3,15), L2 (sqrt3, 5*sqrt3), Linf (1,5).
double pnorm_map(const AttributeVector& v, Norm norm);

struct ScoredChunk {
    SectionType section_type = SectionType::Unmatched;
    ChunkScore score;
};

struct ScoredChunkPlus {
    SectionType section_type = SectionType::Unmatched;
    ChunkScorePlus score;
};

// Applies the section mask, then the mode's composition. Raises
// AggregationError when the mask starves every chunk or when the record type
// does not match config.mode.
double aggregate(std::span<const ScoredChunk> records, const AggregationConfig& config);
double aggregate(std::span<const ScoredChunkPlus> records, const AggregationConfig& config);

}  // namespace hspim
