#include "jic/io.hpp"

#include <fstream>
#include <sstream>

#include "jic/errors.hpp"
#include "jic/rng.hpp"

namespace jic::io {

namespace fs = std::filesystem;

void for_each_jsonl(const fs::path& path, const std::function<void(size_t, const json&)>& fn,
                    const std::function<void(size_t, const std::string&)>& on_malformed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json value = json::parse(line, nullptr, false);
        if (value.is_discarded() || !value.is_object()) {
            if (on_malformed) {
                on_malformed(lineno, line);
                continue;
            }
            throw IoError("malformed JSON at " + path.string() + ":" + std::to_string(lineno));
        }
        fn(lineno, value);
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> records;
    for_each_jsonl(path, [&](size_t, const json& value) { records.push_back(value); });
    return records;
}

namespace {

void rename_into_place(const fs::path& tmp, const fs::path& path) {
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failure on " + tmp.string());
    }
    rename_into_place(tmp, path);
}

void write_jsonl_atomic(const fs::path& path, const std::vector<json>& records) {
    std::ostringstream body;
    for (const auto& record : records) body << record.dump() << "\n";
    write_text_atomic(path, body.str());
}

void write_json_atomic(const fs::path& path, const json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw IoError("malformed JSON document: " + path.string());
    return doc;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string file_checksum(const fs::path& path) {
    std::string bytes = read_text(path);
    uint64_t h = fnv1a64(bytes);
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

struct JsonlAppender::Impl {
    std::ofstream out;
    fs::path path;
};

JsonlAppender::JsonlAppender(const fs::path& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->out.open(path, std::ios::app);
    if (!impl_->out) {
        delete impl_;
        throw IoError("cannot open " + path.string() + " for append");
    }
}

JsonlAppender::~JsonlAppender() { delete impl_; }

void JsonlAppender::append(const json& record) {
    impl_->out << record.dump() << "\n";
    impl_->out.flush();
    if (!impl_->out) throw IoError("append failure on " + impl_->path.string());
}

}  // namespace jic::io
