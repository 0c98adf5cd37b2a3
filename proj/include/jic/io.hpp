#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace jic::io {

using json = nlohmann::json;

// Visits every line of a line-delimited-JSON file. The visitor receives the
// 1-based line number and the parsed value; unparseable lines invoke
// `on_malformed` (never fatal) when provided, otherwise throw IoError.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(size_t, const json&)>& fn,
                    const std::function<void(size_t, const std::string&)>& on_malformed = nullptr);

std::vector<json> read_jsonl(const std::filesystem::path& path);

// Serializes one value per line. Writes to a temp file in the same
// directory and renames into place so readers never observe partial output.
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<json>& records);

void write_json_atomic(const std::filesystem::path& path, const json& doc);

void write_text_atomic(const std::filesystem::path& path, const std::string& content);

json read_json(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

// FNV-1a 64 over the file bytes, hex-encoded. Used for manifest
// output-integrity checks and rerun-determinism audits.
std::string file_checksum(const std::filesystem::path& path);

// Incremental line-oriented writer with explicit flush, for resumable
// outputs that must survive a killed run.
class JsonlAppender {
public:
    explicit JsonlAppender(const std::filesystem::path& path);
    ~JsonlAppender();
    JsonlAppender(const JsonlAppender&) = delete;
    JsonlAppender& operator=(const JsonlAppender&) = delete;

    void append(const json& record);  // writes one line and flushes

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace jic::io
