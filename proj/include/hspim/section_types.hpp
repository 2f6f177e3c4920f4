#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace hspim {

// The nine extended-IMRaD section types plus the Unmatched sentinel.
// Unmatched is not counted in kSectionTypeCount.
enum class SectionType {
    Abstract = 0,
    Introduction,
    RelatedWork,
    Approach,
    AnalysisTheory,
    Experiments,
    ExperimentAnalysis,
    Discussion,
    Conclusion,
    Unmatched,
};

inline constexpr size_t kSectionTypeCount = 9;

constexpr std::array<SectionType, kSectionTypeCount> all_section_types() {
    return {SectionType::Abstract,       SectionType::Introduction,
            SectionType::RelatedWork,    SectionType::Approach,
            SectionType::AnalysisTheory, SectionType::Experiments,
            SectionType::ExperimentAnalysis, SectionType::Discussion,
            SectionType::Conclusion};
}

std::string section_type_name(SectionType t);

// Human-readable display label ("Related Work", "Analysis Theory", ...).
std::string section_type_label(SectionType t);

// Parses canonical names, display labels, and the alias groups
// (Approach/Methodology/Model/Method, Discussion/Limitations). Whitespace,
// case, and separators are ignored. Returns nullopt when nothing matches.
std::optional<SectionType> section_type_from_label(std::string_view label);

}  // namespace hspim
