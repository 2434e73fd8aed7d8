#pragma once

// Minimal CSV I/O for the toolkit's file formats. Fields never contain
// commas or quotes, so no quoting rules are needed. Doubles are written
// with std::to_chars shortest round-trip formatting, which read_double
// recovers exactly.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clilm::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line_no = 0;  // 1-based line in the file
};

struct File {
    std::vector<std::string> comments;  // leading '#' lines, without newline
    std::vector<std::string> header;
    std::vector<Record> records;
};

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline File read_file(const std::filesystem::path& path,
                      const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    File file;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!have_header && line.front() == '#') {
            file.comments.push_back(line);
            continue;
        }
        if (!have_header) {
            file.header = split_fields(line);
            if (file.header != expected_header) {
                std::ostringstream msg;
                msg << path.string() << ":" << line_no << ": expected header '";
                for (std::size_t i = 0; i < expected_header.size(); ++i) {
                    if (i) msg << ',';
                    msg << expected_header[i];
                }
                msg << "', got '" << line << "'";
                throw std::runtime_error(msg.str());
            }
            have_header = true;
            continue;
        }
        Record rec{split_fields(line), line_no};
        if (rec.fields.size() != expected_header.size()) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": expected "
                << expected_header.size() << " fields, got " << rec.fields.size();
            throw std::runtime_error(msg.str());
        }
        file.records.push_back(std::move(rec));
    }
    if (!have_header) {
        throw std::runtime_error(path.string() + ": missing header line");
    }
    return file;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double read_double(const std::filesystem::path& path, const Record& rec,
                          std::size_t field, std::string_view name) {
    const std::string& s = rec.fields.at(field);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        std::ostringstream msg;
        msg << path.string() << ":" << rec.line_no << ": field '" << name
            << "' is not a number: '" << s << "'";
        throw std::runtime_error(msg.str());
    }
    return v;
}

inline long read_int(const std::filesystem::path& path, const Record& rec,
                     std::size_t field, std::string_view name) {
    const std::string& s = rec.fields.at(field);
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        std::ostringstream msg;
        msg << path.string() << ":" << rec.line_no << ": field '" << name
            << "' is not an integer: '" << s << "'";
        throw std::runtime_error(msg.str());
    }
    return v;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }

    void comment(std::string_view text) { out_ << '#' << text << '\n'; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("write failed for " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace clilm::csv
