#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "lite/types.hpp"

namespace lite::ingest {

/// Header written by the collection script; on read, fields are compared after trimming.
inline constexpr std::string_view kCollectionHeader =
    "delta Time, Unix Time, ldr1, ldr2, ldr3, ldr4, ldr5, label";

/// Parses one device line `v1,v2,v3,v4,v5` (optional CR and surrounding whitespace).
/// Throws ParseError with kind FieldCount, NonInteger or OutOfRange.
Channels parse_serial_line(std::string_view line);

/// Formats channels the way the device prints them (no line terminator).
std::string format_serial_line(const Channels& channels);

/// Reads a collection CSV. Data rows may end with the collector's trailing comma.
/// sample_interval is the mean frame gap (default interval for fewer than two rows).
LabeledTrace read_collection_csv(std::istream& source);

/// Writes header plus one `t_rel,t_unix,c1,..,c5,label,` row per frame.
/// Reals are printed in shortest round-trip form. Throws lite::Error if the sink fails.
void write_collection_csv(const LabeledTrace& trace, std::ostream& sink);

/// Wraps parse_serial_line over a line stream; blank lines are skipped. Frames are labeled
/// RELAX with t_rel = index * interval and t_unix = t_unix_start + t_rel.
LabeledTrace read_frames_from_line_stream(std::istream& source, double interval,
                                          double t_unix_start = 0.0);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

/// Strict decimal parse of a whole token (surrounding blanks allowed).
/// Throws ParseError(NonNumber).
double parse_real(std::string_view token);

} // namespace lite::ingest
