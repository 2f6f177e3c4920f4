#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hspim/section_types.hpp"

namespace hspim {

// Two-layer question sets: one specific list per section type plus the
// common list shared by every section.
struct QuestionBank {
    std::vector<std::string> common;
    std::map<SectionType, std::vector<std::string>> specific;

    void validate() const;  // all 9 types present, every list non-empty
    size_t specific_size(SectionType t) const;

    // N_c x prod_r N_r; 11^10 for the shipped default bank.
    uint64_t search_space_size() const;

    static QuestionBank load(const std::string& path);
    void save(const std::string& path) const;
};

// One question-prompt combination: the GA genome. Slot order follows the
// canonical SectionType order.
struct Individual {
    size_t common_index = 0;
    std::array<size_t, kSectionTypeCount> specific_indices{};

    bool operator==(const Individual&) const = default;

    size_t specific_for(SectionType t) const;
    void set_specific(SectionType t, size_t index);
    void validate(const QuestionBank& bank) const;
    uint64_t key() const;  // stable identity hash for memo tables

    static Individual defaults();  // index 0 everywhere: the naive combination
    static Individual load(const std::string& path);
    void save(const std::string& path) const;

    std::string to_json() const;
    static Individual from_json(const std::string& text);
};

// specific question + " " + common question
std::string compose(const Individual& individual, SectionType section_type,
                    const QuestionBank& bank);

// common question alone; the route for Unmatched chunks
std::string compose_common_only(const Individual& individual, const QuestionBank& bank);

Individual random_individual(const QuestionBank& bank, uint64_t seed);
Individual random_individual(const QuestionBank& bank, std::mt19937_64& rng);

}  // namespace hspim
