#include "hspim/questions.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hspim/errors.hpp"
#include "hspim/util.hpp"

namespace hspim {

using nlohmann::json;

void QuestionBank::validate() const {
    if (common.empty()) throw UsageError("question bank: common list is empty");
    for (SectionType t : all_section_types()) {
        auto it = specific.find(t);
        if (it == specific.end() || it->second.empty())
            throw UsageError("question bank: no specific questions for " +
                             section_type_name(t));
    }
}

size_t QuestionBank::specific_size(SectionType t) const {
    auto it = specific.find(t);
    if (it == specific.end())
        throw UsageError("question bank: no list for " + section_type_name(t));
    return it->second.size();
}

uint64_t QuestionBank::search_space_size() const {
    validate();
    uint64_t size = common.size();
    for (SectionType t : all_section_types()) size *= specific_size(t);
    return size;
}

QuestionBank QuestionBank::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open question bank: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("malformed question bank " + path + ": " + e.what());
    }
    QuestionBank bank;
    if (!root.contains("common") || !root["common"].is_array())
        throw UsageError("question bank lacks \"common\" array: " + path);
    for (const auto& q : root["common"]) bank.common.push_back(q.get<std::string>());
    if (!root.contains("specific") || !root["specific"].is_object())
        throw UsageError("question bank lacks \"specific\" object: " + path);
    for (auto it = root["specific"].begin(); it != root["specific"].end(); ++it) {
        auto t = section_type_from_label(it.key());
        if (!t || *t == SectionType::Unmatched)
            throw UsageError("question bank: unknown section type \"" + it.key() + "\"");
        std::vector<std::string> qs;
        for (const auto& q : it.value()) qs.push_back(q.get<std::string>());
        bank.specific[*t] = std::move(qs);
    }
    bank.validate();
    return bank;
}

void QuestionBank::save(const std::string& path) const {
    validate();
    json root;
    root["common"] = common;
    json spec = json::object();
    for (SectionType t : all_section_types()) spec[section_type_name(t)] = specific.at(t);
    root["specific"] = std::move(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write question bank: " + path);
    out << root.dump(2) << "\n";
}

size_t Individual::specific_for(SectionType t) const {
    size_t i = static_cast<size_t>(t);
    if (i >= kSectionTypeCount)
        throw UsageError("individual has no slot for " + section_type_name(t));
    return specific_indices[i];
}

void Individual::set_specific(SectionType t, size_t index) {
    size_t i = static_cast<size_t>(t);
    if (i >= kSectionTypeCount)
        throw UsageError("individual has no slot for " + section_type_name(t));
    specific_indices[i] = index;
}

void Individual::validate(const QuestionBank& bank) const {
    if (common_index >= bank.common.size())
        throw UsageError("individual common index " + std::to_string(common_index) +
                         " out of range");
    for (SectionType t : all_section_types()) {
        if (specific_for(t) >= bank.specific_size(t))
            throw UsageError("individual specific index for " + section_type_name(t) +
                             " out of range");
    }
}

uint64_t Individual::key() const {
    uint64_t h = fnv1a64("individual");
    h = hash_mix(h, common_index);
    for (size_t v : specific_indices) h = hash_mix(h, v);
    return h;
}

Individual Individual::defaults() {
    return Individual{};
}

std::string Individual::to_json() const {
    json root;
    root["common"] = common_index;
    json spec = json::object();
    for (SectionType t : all_section_types())
        spec[section_type_name(t)] = specific_for(t);
    root["specific"] = std::move(spec);
    return root.dump(2);
}

Individual Individual::from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed individual JSON: ") + e.what());
    }
    Individual ind;
    ind.common_index = root.at("common").get<size_t>();
    for (SectionType t : all_section_types())
        ind.set_specific(t, root.at("specific").at(section_type_name(t)).get<size_t>());
    return ind;
}

Individual Individual::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open individual file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void Individual::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write individual file: " + path);
    out << to_json() << "\n";
}

std::string compose(const Individual& individual, SectionType section_type,
                    const QuestionBank& bank) {
    if (section_type == SectionType::Unmatched)
        throw UsageError("compose: Unmatched chunks take compose_common_only");
    size_t si = individual.specific_for(section_type);
    const auto& list = bank.specific.at(section_type);
    if (si >= list.size())
        throw UsageError("compose: specific index out of range for " +
                         section_type_name(section_type));
    if (individual.common_index >= bank.common.size())
        throw UsageError("compose: common index out of range");
    return list[si] + " " + bank.common[individual.common_index];
}

std::string compose_common_only(const Individual& individual, const QuestionBank& bank) {
    if (individual.common_index >= bank.common.size())
        throw UsageError("compose_common_only: common index out of range");
    return bank.common[individual.common_index];
}

Individual random_individual(const QuestionBank& bank, std::mt19937_64& rng) {
    bank.validate();
    Individual ind;
    ind.common_index = static_cast<size_t>(rng_below(rng, bank.common.size()));
    for (SectionType t : all_section_types())
        ind.set_specific(t, static_cast<size_t>(rng_below(rng, bank.specific_size(t))));
    return ind;
}

Individual random_individual(const QuestionBank& bank, uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_individual(bank, rng);
}

}  // namespace hspim
