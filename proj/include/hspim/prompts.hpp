#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hspim/section_types.hpp"

namespace hspim::prompts {

// The deterministic mock provider parses these markers back out of the user
// text, so the builders below are the only place prompts are assembled.
inline constexpr const char* kContentOpen = "<<<\n";
inline constexpr const char* kContentClose = "\n>>>";
inline constexpr const char* kQaOpen = "[[[\n";
inline constexpr const char* kQaClose = "\n]]]";
inline constexpr const char* kClassifyLead = "Classify the following paper section";
inline constexpr const char* kScoreLead = "Return a JSON object";
inline constexpr const char* kQuestionLead = "Question: ";
inline constexpr const char* kHeadingLead = "Heading: ";

std::string classification_system();
std::string classification_user(const std::string& heading, const std::string& body_prefix,
                                bool allow_unmatched);

std::string qa_system();
std::string qa_user(const std::string& question, const std::string& body);

std::string scoring_system();
// keys: the exact JSON keys the scorer must emit, in order.
std::string scoring_user(SectionType type, const std::string& body,
                         const std::optional<std::pair<std::string, std::string>>& qa,
                         const std::vector<std::string>& keys);

}  // namespace hspim::prompts
