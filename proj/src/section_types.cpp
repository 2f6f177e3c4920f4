#include "hspim/section_types.hpp"

#include <algorithm>
#include <cctype>

namespace hspim {

std::string section_type_name(SectionType t) {
    switch (t) {
        case SectionType::Abstract: return "Abstract";
        case SectionType::Introduction: return "Introduction";
        case SectionType::RelatedWork: return "RelatedWork";
        case SectionType::Approach: return "Approach";
        case SectionType::AnalysisTheory: return "AnalysisTheory";
        case SectionType::Experiments: return "Experiments";
        case SectionType::ExperimentAnalysis: return "ExperimentAnalysis";
        case SectionType::Discussion: return "Discussion";
        case SectionType::Conclusion: return "Conclusion";
        case SectionType::Unmatched: return "Unmatched";
    }
    return "Unmatched";
}

std::string section_type_label(SectionType t) {
    switch (t) {
        case SectionType::RelatedWork: return "Related Work";
        case SectionType::AnalysisTheory: return "Analysis Theory";
        case SectionType::ExperimentAnalysis: return "Experiment Analysis";
        default: return section_type_name(t);
    }
}

namespace {

// Lower-cased, alphanumeric only: "Related Work" == "relatedwork" == "related_work".
std::string squash(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

std::optional<SectionType> section_type_from_label(std::string_view label) {
    std::string key = squash(label);
    if (key.empty()) return std::nullopt;
    for (SectionType t : all_section_types()) {
        if (key == squash(section_type_name(t))) return t;
    }
    if (key == "unmatched") return SectionType::Unmatched;
    // alias groups
    if (key == "methodology" || key == "method" || key == "methods" || key == "model")
        return SectionType::Approach;
    if (key == "limitations" || key == "discussionlimitations")
        return SectionType::Discussion;
    if (key == "approachmethodologymodelmethod") return SectionType::Approach;
    return std::nullopt;
}

}  // namespace hspim
