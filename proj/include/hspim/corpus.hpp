#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hspim {

// One peer review row. Scores are the 1..5 integers from the review form.
struct Review {
    int originality = 0;
    int soundness = 0;
    std::string comment;
};

enum class Split { unassigned, train, validation, test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

struct RawSection {
    std::string heading;
    std::string body;
};

struct Paper {
    std::string id;
    std::vector<RawSection> raw_sections;
    std::vector<Review> reviews;  // empty for unlabeled papers
    Split split = Split::unassigned;
};

struct Dataset {
    std::string name;
    std::vector<Paper> papers;
    std::string schema_version = "1";

    const Paper* find(const std::string& id) const;
    std::vector<const Paper*> papers_in(Split s) const;
};

struct GroundTruthLabel {
    std::string paper_id;
    double innovation = 0.0;  // mean over reviews of (originality+soundness)/2
};

// Maps a corpus' native review field names onto the canonical ones.
// Lookup is exact-match first, then case-insensitive.
struct FieldMap {
    std::vector<std::string> originality_keys = {"originality", "ORIGINALITY"};
    std::vector<std::string> soundness_keys = {"soundness", "SOUNDNESS_CORRECTNESS",
                                               "SOUNDNESS", "CORRECTNESS"};
    std::vector<std::string> comment_keys = {"comment", "comments", "COMMENTS"};
};

struct ReaderOptions {
    FieldMap fields;
};

// Registered readers: "hspim-json" (the native format) and "peerread-json"
// (single-file array of PeerRead-style paper objects with upper-case review
// fields). Unknown ids raise UsageError.
Dataset load_dataset(const std::string& path, const std::string& format = "hspim-json",
                     const ReaderOptions& options = {});

// Writes the native "hspim-json" form, UTF-8, no BOM, 2-space indent.
void save_dataset(const Dataset& dataset, const std::string& path);

std::vector<std::string> registered_formats();

GroundTruthLabel ground_truth(const Paper& paper);

// Deterministic train/test assignment of the papers that still carry no
// split tag (all papers when override_existing). train_fraction applies to
// the pool being assigned.
Dataset split_dataset(const Dataset& dataset, double train_fraction, uint64_t seed,
                      bool override_existing = false);

struct LabelStats {
    size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

LabelStats label_stats(const std::vector<const Paper*>& papers);

}  // namespace hspim
