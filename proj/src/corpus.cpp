#include "jic/corpus.hpp"

#include <set>
#include <unordered_set>

#include "jic/io.hpp"
#include "jic/log.hpp"
#include "jic/text.hpp"

namespace jic {

using io::json;

FieldSchema FieldSchema::canonical() {
    FieldSchema s;
    s.id = "entry_id";
    s.author = "author_id";
    s.body = "body";
    s.title = "title";
    s.created_at = "created_at";
    s.source = "source";
    s.url = "url";
    return s;
}

Corpus::Corpus(std::vector<JournalEntry> entries) : entries_(std::move(entries)) {
    for (size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.author_id.empty()) throw ArgumentError("entry " + e.entry_id + " has empty author_id");
        if (trim(e.body).empty()) throw ArgumentError("entry " + e.entry_id + " has empty body");
        if (!by_id_.emplace(e.entry_id, i).second)
            throw ArgumentError("duplicate entry_id " + e.entry_id);
        by_author_[e.author_id].push_back(i);
    }
}

const JournalEntry* Corpus::find(const std::string& entry_id) const {
    auto it = by_id_.find(entry_id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<std::string> Corpus::author_ids() const {
    std::vector<std::string> ids;
    ids.reserve(by_author_.size());
    for (const auto& [author, _] : by_author_) ids.push_back(author);
    return ids;
}

std::vector<const JournalEntry*> Corpus::author_entries(const std::string& author_id) const {
    auto it = by_author_.find(author_id);
    if (it == by_author_.end()) throw ArgumentError("unknown author " + author_id);
    std::vector<const JournalEntry*> out;
    out.reserve(it->second.size());
    for (size_t idx : it->second) out.push_back(&entries_[idx]);
    return out;
}

namespace {

std::string field_as_string(const json& record, const std::string& key) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) return "";
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

int64_t field_as_epoch(const json& record, const std::string& key) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) return 0;
    if (it->is_number()) return static_cast<int64_t>(it->get<double>());
    if (it->is_string()) {
        try {
            return static_cast<int64_t>(std::stod(it->get<std::string>()));
        } catch (...) {
            return 0;
        }
    }
    return 0;
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path, const FieldSchema& schema) {
    DropReport report;
    std::vector<JournalEntry> kept;
    std::unordered_set<std::string> seen_ids;
    std::set<std::pair<std::string, std::string>> seen_bodies;  // (author, normalized body)

    io::for_each_jsonl(
        path,
        [&](size_t lineno, const json& record) {
            report.input_lines++;
            JournalEntry e;
            e.author_id = trim(field_as_string(record, schema.author));
            e.body = field_as_string(record, schema.body);
            if (e.author_id.empty() || trim(e.body).empty()) {
                report.missing_field++;
                return;
            }
            e.entry_id = field_as_string(record, schema.id);
            if (e.entry_id.empty()) e.entry_id = "line-" + std::to_string(lineno);
            e.title = field_as_string(record, schema.title);
            e.created_at = field_as_epoch(record, schema.created_at);
            e.source = field_as_string(record, schema.source);
            e.url = field_as_string(record, schema.url);

            if (!seen_ids.insert(e.entry_id).second) {
                report.duplicates++;
                return;
            }
            if (!seen_bodies.emplace(e.author_id, collapse_whitespace(e.body)).second) {
                report.duplicates++;
                return;
            }
            kept.push_back(std::move(e));
        },
        [&](size_t lineno, const std::string&) {
            report.input_lines++;
            report.malformed++;
            log::warn("skipping malformed line " + std::to_string(lineno) + " in " + path.string());
        });

    report.kept = kept.size();
    return LoadResult{Corpus(std::move(kept)), report};
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::vector<json> lines;
    lines.reserve(corpus.size());
    for (const auto& e : corpus.entries()) {
        lines.push_back(json{{"entry_id", e.entry_id},
                             {"author_id", e.author_id},
                             {"title", e.title},
                             {"body", e.body},
                             {"created_at", e.created_at},
                             {"source", e.source},
                             {"url", e.url}});
    }
    io::write_jsonl_atomic(path, lines);
}

void save_drop_report(const DropReport& report, const std::filesystem::path& path) {
    io::write_json_atomic(path, json{{"input_lines", report.input_lines},
                                     {"kept", report.kept},
                                     {"malformed", report.malformed},
                                     {"missing_field", report.missing_field},
                                     {"duplicates", report.duplicates}});
}

}  // namespace jic
