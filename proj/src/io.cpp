#include "gcbaudit/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <unordered_map>

#include <json.hpp>

namespace gcbaudit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

template <typename T>
void write_matrix(const fs::path& path, const Matrix<T>& m) {
    std::string buf;
    buf.reserve(kLogitHeaderBytes + m.values().size() * 4);
    buf.append(kLogitMagic, 4);
    put_u32(buf, kLogitVersion);
    put_u64(buf, m.rows());
    put_u64(buf, m.cols());
    for (T v : m.values()) put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw AuditError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw AuditError(ErrorCode::io, "failed writing " + path.string());
}

std::string where(const fs::path& path, std::size_t line) { return path.string() + ":" + std::to_string(line) + ": "; }

/// Reads every non-blank line as a JSON object; a leading object holding
/// "format" is returned separately as the header.
std::vector<std::pair<std::size_t, json>> read_jsonl(const fs::path& path, json& header) {
    std::ifstream in(path);
    if (!in) throw AuditError(ErrorCode::io, "cannot open " + path.string());
    std::vector<std::pair<std::size_t, json>> records;
    std::string line;
    std::size_t lineno = 0;
    header = json::object();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw AuditError(ErrorCode::parse, where(path, lineno) + e.what());
        }
        if (!obj.is_object()) throw AuditError(ErrorCode::parse, where(path, lineno) + "record is not a JSON object");
        if (records.empty() && header.empty() && obj.contains("format")) {
            header = std::move(obj);
            continue;
        }
        records.emplace_back(lineno, std::move(obj));
    }
    return records;
}

std::string id_text(const json& v, const fs::path& path, std::size_t line, const char* field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw AuditError(ErrorCode::parse, where(path, line) + "field '" + field + "' must be a string or integer");
}

const json& field(const json& obj, const char* name, const fs::path& path, std::size_t line) {
    auto it = obj.find(name);
    if (it == obj.end()) throw AuditError(ErrorCode::parse, where(path, line) + "missing field '" + name + "'");
    return *it;
}

/// String labels are numbered by first appearance; integer labels are kept
/// (buckets) or densified by `finalize` (groups, stories). A column may not
/// mix the two.
class LabelColumn {
public:
    LabelColumn(const char* name, bool integer_passthrough) : name_(name), passthrough_(integer_passthrough) {}

    Index add(const json& v, const fs::path& path, std::size_t line) {
        if (v.is_number_integer()) {
            check_kind(false, path, line);
            const auto x = v.get<std::int64_t>();
            if (x < 0) throw AuditError(ErrorCode::parse, where(path, line) + "'" + name_ + "' must be >= 0");
            return static_cast<Index>(x);
        }
        if (v.is_string()) {
            check_kind(true, path, line);
            return intern(v.get<std::string>());
        }
        throw AuditError(ErrorCode::parse, where(path, line) + "'" + name_ + "' must be a string or integer");
    }

    /// Integer labels of a non-passthrough column are renumbered densely,
    /// keeping their numeric order.
    void finalize(std::vector<Index>& labels) const {
        if (passthrough_ || kind_.value_or(true)) return;
        std::vector<Index> used(labels);
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        for (auto& l : labels) l = static_cast<Index>(std::lower_bound(used.begin(), used.end(), l) - used.begin());
    }

private:
    void check_kind(bool is_string, const fs::path& path, std::size_t line) {
        if (kind_ && *kind_ != is_string) {
            throw AuditError(ErrorCode::parse, where(path, line) + "'" + name_ + "' mixes string and integer labels");
        }
        kind_ = is_string;
    }

    Index intern(const std::string& key) {
        auto [it, inserted] = ids_.try_emplace(key, static_cast<Index>(ids_.size()));
        return it->second;
    }

    std::string name_;
    bool passthrough_;
    std::optional<bool> kind_;
    std::unordered_map<std::string, Index> ids_;
};

}  // namespace

void write_logits(const fs::path& path, const LogitMatrix& logits) { write_matrix(path, logits); }

void write_logits(const fs::path& path, const ScoreMatrix& scores) { write_matrix(path, scores); }

LogitMatrix read_logits(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AuditError(ErrorCode::io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < kLogitHeaderBytes) {
        throw AuditError(ErrorCode::parse, path.string() + ": truncated header: expected " +
                                               std::to_string(kLogitHeaderBytes) + " bytes, found " +
                                               std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data(), kLogitMagic, 4) != 0) {
        throw AuditError(ErrorCode::parse, path.string() + ": bad magic, expected \"GCBL\"");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto version = static_cast<std::uint32_t>(get_le(p + 4, 4));
    if (version != kLogitVersion) {
        throw AuditError(ErrorCode::parse, path.string() + ": unsupported version " + std::to_string(version));
    }
    const std::uint64_t rows = get_le(p + 8, 8);
    const std::uint64_t cols = get_le(p + 16, 8);
    if (cols != 0 && rows > (UINT64_MAX - kLogitHeaderBytes) / 4 / cols) {
        throw AuditError(ErrorCode::parse, path.string() + ": matrix dimensions overflow");
    }
    const std::uint64_t expected = kLogitHeaderBytes + rows * cols * 4;
    if (bytes.size() != expected) {
        throw AuditError(ErrorCode::parse, path.string() + ": size mismatch: expected " + std::to_string(expected) +
                                               " bytes for " + std::to_string(rows) + "x" + std::to_string(cols) +
                                               ", found " + std::to_string(bytes.size()));
    }
    std::vector<float> values(rows * cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p + kLogitHeaderBytes + 4 * i, 4)));
    }
    return LogitMatrix(rows, cols, std::move(values));
}

CandidateManifest read_candidates(const fs::path& path) {
    json header;
    const auto records = read_jsonl(path, header);
    CandidateManifest out;
    std::vector<Index> bucket_of;
    std::vector<std::string> keys;
    std::vector<std::int64_t> windows;
    bool has_key = false, has_window = false;
    LabelColumn buckets("bucket", true);
    std::unordered_map<std::string, std::size_t> seen;

    for (const auto& [line, rec] : records) {
        auto id = id_text(field(rec, "id", path, line), path, line, "id");
        if (!seen.emplace(id, out.ids.size()).second) {
            throw AuditError(ErrorCode::parse, where(path, line) + "duplicate candidate id '" + id + "'");
        }
        out.ids.push_back(std::move(id));
        bucket_of.push_back(buckets.add(field(rec, "bucket", path, line), path, line));
        if (rec.contains("stimulus_key")) {
            has_key = true;
            keys.resize(out.ids.size());
            keys.back() = id_text(rec["stimulus_key"], path, line, "stimulus_key");
        }
        if (rec.contains("window_index")) {
            if (!rec["window_index"].is_number_integer()) {
                throw AuditError(ErrorCode::parse, where(path, line) + "'window_index' must be an integer");
            }
            has_window = true;
            windows.resize(out.ids.size());
            windows.back() = rec["window_index"].get<std::int64_t>();
        }
    }
    keys.resize(out.ids.size());
    windows.resize(out.ids.size());

    std::optional<std::size_t> num_buckets;
    if (header.contains("num_buckets")) num_buckets = header["num_buckets"].get<std::size_t>();
    try {
        out.pool = CandidatePool::from_buckets(
            std::move(bucket_of), num_buckets,
            has_key ? std::optional(std::move(keys)) : std::nullopt,
            has_window ? std::optional(std::move(windows)) : std::nullopt);
    } catch (const AuditError& e) {
        throw AuditError(e.code(), path.string() + ": " + e.what());
    }
    return out;
}

QuerySet read_queries(const fs::path& path, const CandidateManifest& candidates, std::vector<std::string>* query_ids) {
    json header;
    const auto records = read_jsonl(path, header);
    std::unordered_map<std::string, Index> cand_index;
    for (std::size_t j = 0; j < candidates.ids.size(); ++j) cand_index.emplace(candidates.ids[j], static_cast<Index>(j));

    std::vector<Index> target_of, group_of, story_of;
    std::vector<std::int64_t> order_of;
    std::vector<std::string> keys;
    bool has_story = false, has_order = false, has_key = false;
    LabelColumn groups("group", false), stories("story", false);
    if (query_ids) query_ids->clear();

    for (const auto& [line, rec] : records) {
        const auto id = id_text(field(rec, "id", path, line), path, line, "id");
        if (query_ids) query_ids->push_back(id);
        const auto target = id_text(field(rec, "target", path, line), path, line, "target");
        auto it = cand_index.find(target);
        if (it == cand_index.end()) {
            throw AuditError(ErrorCode::target_out_of_range,
                             where(path, line) + "target '" + target + "' is not a known candidate id");
        }
        target_of.push_back(it->second);
        group_of.push_back(groups.add(field(rec, "group", path, line), path, line));
        const std::size_t n = target_of.size();
        if (rec.contains("story")) {
            has_story = true;
            story_of.resize(n);
            story_of.back() = stories.add(rec["story"], path, line);
        }
        if (rec.contains("order")) {
            if (!rec["order"].is_number_integer()) {
                throw AuditError(ErrorCode::parse, where(path, line) + "'order' must be an integer");
            }
            has_order = true;
            order_of.resize(n);
            order_of.back() = rec["order"].get<std::int64_t>();
        }
        if (rec.contains("stimulus_key")) {
            has_key = true;
            keys.resize(n);
            keys.back() = id_text(rec["stimulus_key"], path, line, "stimulus_key");
        }
    }
    const std::size_t n = target_of.size();
    groups.finalize(group_of);
    story_of.resize(n);
    stories.finalize(story_of);
    order_of.resize(n);
    keys.resize(n);
    try {
        return QuerySet::from_arrays(std::move(target_of), std::move(group_of),
                                     has_story ? std::optional(std::move(story_of)) : std::nullopt,
                                     has_order ? std::optional(std::move(order_of)) : std::nullopt,
                                     has_key ? std::optional(std::move(keys)) : std::nullopt);
    } catch (const AuditError& e) {
        throw AuditError(e.code(), path.string() + ": " + e.what());
    }
}

void write_candidates(const fs::path& path, const CandidatePool& pool) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw AuditError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    json header = json::object();
    header["format"] = "gcb-candidates";
    header["version"] = 1;
    header["num_buckets"] = pool.num_buckets();
    out << header.dump() << '\n';
    for (std::size_t j = 0; j < pool.size(); ++j) {
        json rec = json::object();
        rec["id"] = j;
        rec["bucket"] = pool.bucket_of(j);
        if (pool.stimulus_key()) rec["stimulus_key"] = (*pool.stimulus_key())[j];
        if (pool.window_index()) rec["window_index"] = (*pool.window_index())[j];
        out << rec.dump() << '\n';
    }
    if (!out) throw AuditError(ErrorCode::io, "failed writing " + path.string());
}

void write_queries(const fs::path& path, const QuerySet& queries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw AuditError(ErrorCode::io, "cannot open " + path.string() + " for writing");
    json header = json::object();
    header["format"] = "gcb-queries";
    header["version"] = 1;
    out << header.dump() << '\n';
    for (std::size_t w = 0; w < queries.size(); ++w) {
        json rec = json::object();
        rec["id"] = w;
        rec["target"] = queries.target_of(w);
        rec["group"] = queries.group_of(w);
        if (queries.story_of()) rec["story"] = (*queries.story_of())[w];
        if (queries.order_of()) rec["order"] = (*queries.order_of())[w];
        if (queries.stimulus_key_of()) rec["stimulus_key"] = (*queries.stimulus_key_of())[w];
        out << rec.dump() << '\n';
    }
    if (!out) throw AuditError(ErrorCode::io, "failed writing " + path.string());
}

AuditBundle load_bundle(const fs::path& logits_path, const fs::path& candidates_path, const fs::path& queries_path) {
    auto logits = read_logits(logits_path);
    auto candidates = read_candidates(candidates_path);
    auto queries = read_queries(queries_path, candidates);
    return validate_bundle(std::move(logits), std::move(candidates.pool), std::move(queries));
}

BundlePaths bundle_paths(const fs::path& prefix) {
    const std::string p = prefix.string();
    return {p + ".gcbl", p + ".candidates.jsonl", p + ".queries.jsonl"};
}

void save_bundle(const fs::path& prefix, const AuditBundle& bundle) {
    const auto paths = bundle_paths(prefix);
    write_logits(paths.logits, bundle.logits());
    write_candidates(paths.candidates, bundle.candidates());
    write_queries(paths.queries, bundle.queries());
}

}  // namespace gcbaudit
