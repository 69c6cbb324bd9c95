#include "tribell/config.hpp"

#include <cctype>
#include <charconv>
#include <string>

namespace tribell {

namespace {

class LineParser {
public:
    LineParser(std::string_view text, int line) : text_(text), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw DomainError("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    bool at_end_or_comment() {
        skip_space();
        return pos_ >= text_.size() || text_[pos_] == '#';
    }

    bool consume(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string key() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }

    Json value() {
        skip_space();
        if (pos_ >= text_.size()) fail("missing value");
        const char c = text_[pos_];
        if (c == '"') return string_value();
        if (c == '[') return array_value();
        if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number_value();
    }

private:
    Json string_value() {
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_++];
            if (c == '\\') {
                if (pos_ >= text_.size()) fail("unterminated escape");
                const char e = text_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out.push_back(c);
        }
        if (pos_ >= text_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    Json array_value() {
        ++pos_;
        Json arr = Json::array();
        if (consume(']')) return arr;
        while (true) {
            arr.push_back(value());
            if (consume(']')) return arr;
            if (!consume(',')) fail("expected ',' or ']' in array");
            if (consume(']')) return arr;
        }
    }

    Json number_value() {
        const std::size_t start = pos_;
        std::string digits;
        bool is_float = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
                digits.push_back(c);
            } else if (c == '.' || c == 'e' || c == 'E') {
                digits.push_back(c);
                is_float = true;
            } else if (c != '_') {
                break;
            }
            ++pos_;
        }
        if (digits.empty()) fail("unrecognized value '" + std::string(text_.substr(start)) + "'");
        const char* first = digits.data();
        const char* last = digits.data() + digits.size();
        if (*first == '+') ++first;
        if (!is_float) {
            if (*first == '-') {
                std::int64_t v = 0;
                const auto r = std::from_chars(first, last, v);
                if (r.ec != std::errc() || r.ptr != last) fail("bad integer '" + digits + "'");
                return v;
            }
            std::uint64_t v = 0;
            const auto r = std::from_chars(first, last, v);
            if (r.ec != std::errc() || r.ptr != last) fail("bad integer '" + digits + "'");
            return v;
        }
        double v = 0.0;
        const auto r = std::from_chars(first, last, v);
        if (r.ec != std::errc() || r.ptr != last) fail("bad number '" + digits + "'");
        return v;
    }

    std::string_view text_;
    int line_;
    std::size_t pos_ = 0;
};

}  // namespace

Json parse_toml_subset(std::string_view text) {
    Json root = Json::object();
    Json::json_pointer table;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        start = end + 1;

        LineParser p(line, line_no);
        if (p.at_end_or_comment()) continue;
        if (p.consume('[')) {
            table = Json::json_pointer();
            do {
                table /= p.key();
            } while (p.consume('.'));
            if (!p.consume(']')) p.fail("expected ']'");
            if (!p.at_end_or_comment()) p.fail("trailing characters after table header");
            Json& t = root[table];
            if (!t.is_object()) {
                if (!t.is_null()) p.fail("table redefines a value");
                t = Json::object();
            }
            continue;
        }
        const std::string key = p.key();
        if (!p.consume('=')) p.fail("expected '='");
        Json value = p.value();
        if (!p.at_end_or_comment()) p.fail("trailing characters after value");
        Json& t = root[table];
        if (t.contains(key)) p.fail("duplicate key '" + key + "'");
        t[key] = std::move(value);
    }
    return root;
}

Json parse_config_text(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        try {
            return Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw DomainError(std::string("config: malformed JSON: ") + e.what());
        }
    }
    return parse_toml_subset(text);
}

Json load_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text_file(path));
}

}  // namespace tribell
