#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mvqa {

// Canonical real formatting: 9 significant digits, "-0" normalized to "0".
// Every float that lands in an output file goes through this so that
// re-running a stage reproduces files byte for byte.
std::string format_real(double x);

std::string json_escape(std::string_view s);

// Minimal streaming JSON writer with caller-controlled key order. Output is
// compact (no whitespace). nlohmann/json handles all parsing; it is not used
// for generation output because its double serialization does not honor the
// fixed 9-significant-digit contract.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(std::string_view k);
    JsonWriter& value(double v);
    JsonWriter& value(std::int64_t v);
    JsonWriter& value(std::uint64_t v);
    JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
    JsonWriter& value(unsigned v) { return value(static_cast<std::uint64_t>(v)); }
    JsonWriter& value(long long v) { return value(static_cast<std::int64_t>(v)); }
    JsonWriter& value(bool v);
    JsonWriter& value(std::string_view v);
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }
    JsonWriter& null();
    JsonWriter& raw(std::string_view fragment);

    template <typename T>
    JsonWriter& kv(std::string_view k, const T& v) {
        key(k);
        return value(v);
    }

    std::string str() const { return out_; }

private:
    void separate();
    std::string out_;
    std::vector<char> stack_;  // '{' or '['
    std::vector<bool> first_;
    bool pending_key_ = false;
};

// Parse helpers with path-bearing diagnostics.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json parse_json_file(const std::string& path);
nlohmann::json parse_json_text(std::string_view text, const std::string& context);

const nlohmann::json& require_field(const nlohmann::json& j, const char* key, const std::string& ctx);
std::string require_string(const nlohmann::json& j, const char* key, const std::string& ctx);
double require_number(const nlohmann::json& j, const char* key, const std::string& ctx);
std::int64_t require_int(const nlohmann::json& j, const char* key, const std::string& ctx);
bool require_bool(const nlohmann::json& j, const char* key, const std::string& ctx);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mvqa
