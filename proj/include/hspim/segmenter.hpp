#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hspim/corpus.hpp"
#include "hspim/section_types.hpp"

namespace hspim {

class Gateway;

struct SectionChunk {
    std::string paper_id;
    size_t index = 0;  // contiguous from 0 within a paper
    std::string heading;
    std::string body;
    SectionType section_type = SectionType::Unmatched;
    bool classified = false;
};

// One chunk per raw section, in order; sections whose body trims to nothing
// are dropped and the surviving chunks reindexed 0..k-1.
std::vector<SectionChunk> segment(const Paper& paper);

enum class ClassifyMode { strict, lenient };

struct ClassifyOptions {
    ClassifyMode mode = ClassifyMode::lenient;
    size_t body_prefix_chars = 1200;  // body prefix included in the prompt
    int jobs = 1;
};

// Assigns a section type to every chunk via the gateway's classification
// prompt. Count, order, and text are never altered. An unparseable label is
// reprompted once; after that, lenient mode falls back to Unmatched and
// strict mode raises.
std::vector<SectionChunk> classify(std::vector<SectionChunk> chunks, Gateway& gateway,
                                   const ClassifyOptions& options = {});

// Flips ~fraction of the classified chunks to Unmatched, deterministically in
// seed. Used by the label-noise robustness harness.
std::vector<SectionChunk> relabel_fraction_unmatched(std::vector<SectionChunk> chunks,
                                                     double fraction, uint64_t seed);

// "hspim-chunks-json" serialization.
std::string chunks_to_json(const std::vector<SectionChunk>& chunks);
std::vector<SectionChunk> chunks_from_json(const std::string& text);

}  // namespace hspim
