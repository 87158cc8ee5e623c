#pragma once

#include <filesystem>
#include <string>

#include "gcbaudit/core.hpp"

namespace gcbaudit {

// Logit file layout, all integers little-endian:
//   bytes 0-3    magic "GCBL"
//   bytes 4-7    uint32 version (1)
//   bytes 8-15   uint64 rows B
//   bytes 16-23  uint64 cols N
//   then B*N IEEE-754 float32 values, row-major.
// Hard-pruned entries are stored as the most negative finite float.
inline constexpr char kLogitMagic[4] = {'G', 'C', 'B', 'L'};
inline constexpr std::uint32_t kLogitVersion = 1;
inline constexpr std::size_t kLogitHeaderBytes = 24;

void write_logits(const std::filesystem::path& path, const LogitMatrix& logits);
/// Scores are rounded to float32 on write.
void write_logits(const std::filesystem::path& path, const ScoreMatrix& scores);
LogitMatrix read_logits(const std::filesystem::path& path);

// Manifests are JSON Lines. An optional first line carrying "format" is a
// header. Candidate records: {"id", "bucket", "stimulus_key"?,
// "window_index"?}; line order defines candidate index. A candidate header
// may fix "num_buckets". Query records: {"id", "target", "group", "story"?,
// "order"?, "stimulus_key"?}; "target" names a candidate id. Integer or
// string ids are accepted; string buckets, groups and stories are numbered
// by first appearance.
struct CandidateManifest {
    CandidatePool pool;
    std::vector<std::string> ids;
};

CandidateManifest read_candidates(const std::filesystem::path& path);
QuerySet read_queries(const std::filesystem::path& path, const CandidateManifest& candidates,
                      std::vector<std::string>* query_ids = nullptr);

void write_candidates(const std::filesystem::path& path, const CandidatePool& pool);
void write_queries(const std::filesystem::path& path, const QuerySet& queries);

AuditBundle load_bundle(const std::filesystem::path& logits_path, const std::filesystem::path& candidates_path,
                        const std::filesystem::path& queries_path);

/// Writes <prefix>.gcbl, <prefix>.candidates.jsonl and <prefix>.queries.jsonl.
void save_bundle(const std::filesystem::path& prefix, const AuditBundle& bundle);

struct BundlePaths {
    std::filesystem::path logits, candidates, queries;
};
BundlePaths bundle_paths(const std::filesystem::path& prefix);

}  // namespace gcbaudit
