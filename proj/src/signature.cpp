#include "lite/signature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lite/errors.hpp"
#include "lite/ingest.hpp"

namespace lite {

namespace {

bool is_gesture(GestureLabel g) {
    return g == GestureLabel::Extend || g == GestureLabel::Fist || g == GestureLabel::One;
}

void check_sensor(int sensor) {
    if (sensor < 1 || sensor > int(kChannels))
        throw std::invalid_argument("sensor index " + std::to_string(sensor) + " outside 1..5");
}

SensorSet normalized(SensorSet s) {
    for (int v : s) check_sensor(v);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty()) throw std::invalid_argument("active sensor set is empty");
    return s;
}

ChannelValues segment_mean(const LabeledTrace& trace, const Segment& seg) {
    ChannelValues sum{};
    for (std::size_t i = seg.start; i < seg.end; ++i)
        for (std::size_t c = 0; c < kChannels; ++c) sum[c] += trace.frames[i].channels[c];
    for (auto& v : sum) v /= double(seg.length());
    return sum;
}

} // namespace

SignatureTable::SignatureTable(SensorSet active) : active_(normalized(std::move(active))) {}

void SignatureTable::set_active_sensors(SensorSet active) { active_ = normalized(std::move(active)); }

void SignatureTable::set(GestureLabel gesture, int sensor, double delta) {
    if (!is_gesture(gesture))
        throw std::invalid_argument("signatures exist only for extend, fist and one");
    check_sensor(sensor);
    if (!std::isfinite(delta)) throw std::invalid_argument("signature delta must be finite");
    entries_[{gesture, sensor}] = delta;
}

std::optional<double> SignatureTable::find(GestureLabel gesture, int sensor) const {
    auto it = entries_.find({gesture, sensor});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

double SignatureTable::at(GestureLabel gesture, int sensor) const {
    if (auto v = find(gesture, sensor)) return *v;
    throw Error("signature table has no entry for " + std::string(to_string(gesture)) + " / sensor " +
                std::to_string(sensor));
}

std::vector<GestureLabel> SignatureTable::gestures() const {
    std::vector<GestureLabel> out;
    for (auto g : kGestures)
        if (std::any_of(entries_.begin(), entries_.end(), [g](const auto& e) { return e.first.first == g; }))
            out.push_back(g);
    return out;
}

void SignatureTable::validate() const {
    for (auto g : gestures())
        for (int s : active_) (void)at(g, s);
}

void write_signature_csv(const SignatureTable& table, std::ostream& sink) {
    sink << "gesture,sensor,delta\n";
    for (const auto& [key, delta] : table.entries())
        sink << to_string(key.first) << ',' << key.second << ',' << ingest::format_real(delta) << '\n';
    sink.flush();
    if (!sink) throw Error("failed writing signature table");
}

SignatureTable read_signature_csv(std::istream& source, SensorSet active) {
    SignatureTable table(std::move(active));
    std::string line;
    if (!std::getline(source, line))
        throw ParseError(ParseErrorKind::Header, "missing header", 1);
    {
        std::string compact;
        for (char ch : line)
            if (!std::isspace(static_cast<unsigned char>(ch))) compact += ch;
        if (compact != "gesture,sensor,delta")
            throw ParseError(ParseErrorKind::Header, "expected header 'gesture,sensor,delta'", 1);
    }
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
            fields.push_back(line.substr(start, pos - start));
        fields.push_back(line.substr(start));
        if (fields.size() != 3)
            throw ParseError(ParseErrorKind::FieldCount, "expected 3 fields", line_no);
        try {
            const auto gesture = parse_label(fields[0]);
            const double sensor = ingest::parse_real(fields[1]);
            const double delta = ingest::parse_real(fields[2]);
            if (sensor != std::floor(sensor) || sensor < 1 || sensor > double(kChannels))
                throw ParseError(ParseErrorKind::OutOfRange, "sensor index must be 1..5");
            if (!std::isfinite(delta)) throw ParseError(ParseErrorKind::NonFinite, "delta is not finite");
            if (!is_gesture(gesture))
                throw ParseError(ParseErrorKind::UnknownLabel, "signatures exist only for extend, fist and one");
            table.set(gesture, int(sensor), delta);
        } catch (const ParseError& e) {
            throw e.at_line(line_no);
        }
    }
    return table;
}

SignatureTable generate_signatures(const std::vector<LabeledTrace>& traces, const SignatureOptions& opts) {
    SignatureTable table(opts.active);

    for (auto gesture : opts.gestures) {
        if (!is_gesture(gesture))
            throw std::invalid_argument("cannot learn a signature for " + std::string(to_string(gesture)));
        ChannelValues sum{};
        std::size_t pairs = 0;
        for (const auto& trace : traces) {
            if (trace.empty()) continue;
            const auto segs = segment_trace(trace);
            for (std::size_t k = 1; k < segs.size(); ++k) {
                if (segs[k].label != gesture) continue;
                std::size_t r = k - 1;
                if (segs[r].label == GestureLabel::Transition && r > 0) --r;
                if (segs[r].label != GestureLabel::Relax) continue;
                for (const auto* s : {&segs[r], &segs[k]})
                    if (s->length() < opts.min_segment_frames)
                        throw Error(std::string(to_string(s->label)) + " segment at frame " +
                                    std::to_string(s->start) + " has " + std::to_string(s->length()) +
                                    " frames, fewer than " + std::to_string(opts.min_segment_frames));
                const auto relax = segment_mean(trace, segs[r]);
                const auto held = segment_mean(trace, segs[k]);
                for (std::size_t c = 0; c < kChannels; ++c) sum[c] += held[c] - relax[c];
                ++pairs;
            }
        }
        if (pairs == 0)
            throw Error("no relax/" + std::string(to_string(gesture)) + " pairs found");
        for (int s : table.active_sensors()) table.set(gesture, s, sum[s - 1] / double(pairs));
    }
    return table;
}

void ClassifierConfig::validate() const {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
        throw std::invalid_argument("tolerance must be positive");
    if (transition_horizon == 0) throw std::invalid_argument("transition horizon must be at least 1");
    if (!(absolute_floor >= 0.0) || !std::isfinite(absolute_floor))
        throw std::invalid_argument("absolute tolerance floor must be non-negative");
}

ClassifierState::ClassifierState(ClassifierConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<GestureLabel> ClassifierState::last_raw() const {
    if (recent_.empty()) return std::nullopt;
    return recent_.back();
}

GestureLabel ClassifierState::observe(GestureLabel raw) {
    const bool changed = std::any_of(recent_.begin(), recent_.end(), [raw](auto l) { return l != raw; });
    recent_.push_back(raw);
    while (recent_.size() > cfg_.transition_horizon) recent_.pop_front();
    return changed ? GestureLabel::Transition : raw;
}

GestureLabel match_gesture(const SensorFrame& frame, const ChannelValues& baselines,
                           const SignatureTable& table, const ClassifierConfig& cfg) {
    GestureLabel best = GestureLabel::Relax;
    double best_score = std::numeric_limits<double>::infinity();
    for (auto g : table.gestures()) {
        bool matches = true;
        double score = 0.0;
        for (int s : table.active_sensors()) {
            const double sig = table.at(g, s);
            const double delta = double(frame.channels[s - 1]) - baselines[s - 1];
            const double err = std::abs(delta - sig);
            if (err > std::max(cfg.tolerance * std::abs(sig), cfg.absolute_floor)) matches = false;
            score += sig != 0.0 ? err / std::abs(sig) : 0.0;
        }
        if (!matches) continue;
        score /= double(table.active_sensors().size());
        if (score < best_score) {
            best_score = score;
            best = g;
        }
    }
    return best;
}

GestureLabel classify_frame(const SensorFrame& frame, const ChannelValues& baselines,
                            const SignatureTable& table, ClassifierState& state) {
    return state.observe(match_gesture(frame, baselines, table, state.config()));
}

std::vector<GestureLabel> classify_trace(const LabeledTrace& trace, const SignatureTable& table,
                                         const BaselineConfig& baseline_cfg,
                                         const ClassifierConfig& classifier_cfg) {
    table.validate();
    BaselineTracker tracker(baseline_cfg);
    ClassifierState state(classifier_cfg);
    std::vector<GestureLabel> out;
    out.reserve(trace.size());
    for (const auto& frame : trace.frames) out.push_back(classify_frame(frame, tracker.update(frame), table, state));
    return out;
}

} // namespace lite
