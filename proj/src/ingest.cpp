#include "lite/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>
#include <vector>

#include "lite/errors.hpp"

namespace lite::ingest {

namespace {

std::string_view trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

Intensity parse_intensity(std::string_view raw) {
    const auto token = trim(raw);
    long long value = 0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec == std::errc::invalid_argument || ptr != end)
        throw ParseError(ParseErrorKind::NonInteger, "'" + std::string(token) + "' is not an integer");
    if (ec == std::errc::result_out_of_range || value < 0 || value > kMaxIntensity)
        throw ParseError(ParseErrorKind::OutOfRange,
                         "value " + std::string(token) + " outside [0, 1023]");
    return static_cast<Intensity>(value);
}

} // namespace

double parse_real(std::string_view raw) {
    const auto token = trim(raw);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (token.empty() || ec != std::errc{} || ptr != end)
        throw ParseError(ParseErrorKind::NonNumber, "'" + std::string(token) + "' is not a number");
    return value;
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error("cannot format real");
    return std::string(buf.data(), ptr);
}

Channels parse_serial_line(std::string_view line) {
    const auto fields = split_commas(trim(line));
    if (fields.size() != kChannels)
        throw ParseError(ParseErrorKind::FieldCount,
                         "expected 5 comma-separated values, got " + std::to_string(fields.size()));
    Channels out{};
    for (std::size_t i = 0; i < kChannels; ++i) out[i] = parse_intensity(fields[i]);
    return out;
}

std::string format_serial_line(const Channels& channels) {
    std::string out;
    for (std::size_t i = 0; i < kChannels; ++i) {
        if (i) out += ',';
        out += std::to_string(channels[i]);
    }
    return out;
}

LabeledTrace read_collection_csv(std::istream& source) {
    static const std::array<std::string_view, 8> expected{
        "delta Time", "Unix Time", "ldr1", "ldr2", "ldr3", "ldr4", "ldr5", "label"};

    std::string line;
    if (!std::getline(source, line))
        throw ParseError(ParseErrorKind::Header, "missing header", 1);
    {
        auto fields = split_commas(trim(line));
        if (fields.size() == expected.size() + 1 && trim(fields.back()).empty()) fields.pop_back();
        bool ok = fields.size() == expected.size();
        for (std::size_t i = 0; ok && i < fields.size(); ++i) ok = iequals(trim(fields[i]), expected[i]);
        if (!ok) throw ParseError(ParseErrorKind::Header, "malformed header '" + line + "'", 1);
    }

    LabeledTrace trace;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        auto fields = split_commas(body);
        if (fields.size() == 9 && trim(fields.back()).empty()) fields.pop_back();
        if (fields.size() != 8)
            throw ParseError(ParseErrorKind::FieldCount,
                             "expected 8 fields, got " + std::to_string(fields.size()), line_no);
        try {
            SensorFrame frame;
            frame.t_rel = parse_real(fields[0]);
            frame.t_unix = parse_real(fields[1]);
            for (std::size_t c = 0; c < kChannels; ++c) frame.channels[c] = parse_intensity(fields[2 + c]);
            trace.push_back(frame, parse_label(fields[7]));
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
    }
    if (trace.size() >= 2)
        trace.sample_interval =
            (trace.frames.back().t_rel - trace.frames.front().t_rel) / double(trace.size() - 1);
    trace.validate();
    return trace;
}

void write_collection_csv(const LabeledTrace& trace, std::ostream& sink) {
    sink << kCollectionHeader << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& f = trace.frames[i];
        sink << format_real(f.t_rel) << ',' << format_real(f.t_unix) << ',';
        for (auto c : f.channels) sink << c << ',';
        sink << to_string(trace.labels[i]) << ",\n";
    }
    sink.flush();
    if (!sink) throw Error("failed writing collection CSV");
}

LabeledTrace read_frames_from_line_stream(std::istream& source, double interval, double t_unix_start) {
    if (!(interval > 0.0) || !std::isfinite(interval))
        throw std::invalid_argument("sample interval must be positive");
    LabeledTrace trace;
    trace.sample_interval = interval;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        SensorFrame frame;
        try {
            frame.channels = parse_serial_line(line);
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
        frame.t_rel = double(trace.size()) * interval;
        frame.t_unix = t_unix_start + frame.t_rel;
        trace.push_back(frame, GestureLabel::Relax);
    }
    return trace;
}

} // namespace lite::ingest
