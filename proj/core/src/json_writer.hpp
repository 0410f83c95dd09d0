// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace triage::detail {

// Byte-stable JSON emission: callers list object keys in sorted order and
// floats are rendered with 9 significant digits, so identical values always
// serialize to identical bytes.
class JsonWriter {
public:
    std::string take() { return std::move(out_); }

    void begin_object() {
        comma();
        out_ += '{';
        fresh_ = true;
    }
    void end_object() {
        out_ += '}';
        fresh_ = false;
    }
    void begin_array() {
        comma();
        out_ += '[';
        fresh_ = true;
    }
    void end_array() {
        out_ += ']';
        fresh_ = false;
    }

    void key(const char* name) {
        comma();
        append_string(name);
        out_ += ':';
        fresh_ = true;
    }

    void value(const std::string& s) {
        comma();
        append_string(s);
    }
    void value(std::int64_t v) {
        comma();
        out_ += std::to_string(v);
    }
    void value(std::uint64_t v) {
        comma();
        out_ += std::to_string(v);
    }
    void value(bool v) {
        comma();
        out_ += v ? "true" : "false";
    }
    void value(double v) {
        comma();
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        out_ += buf;
    }

    void value(std::span<const std::int64_t> v) {
        begin_array();
        for (std::int64_t x : v) value(x);
        end_array();
    }
    void value(std::span<const float> v) {
        begin_array();
        for (float x : v) value(static_cast<double>(x));
        end_array();
    }

private:
    void comma() {
        if (!fresh_ && !out_.empty()) {
            const char last = out_.back();
            if (last != '{' && last != '[' && last != ':') out_ += ',';
        }
        fresh_ = false;
    }

    void append_string(const std::string& s) {
        out_ += '"';
        for (char c : s) {
            switch (c) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out_ += buf;
                    } else {
                        out_ += c;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    bool fresh_ = true;
};

}  // namespace triage::detail
