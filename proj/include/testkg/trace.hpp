#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "testkg/errors.hpp"
#include "testkg/numfmt.hpp"
#include "testkg/timeutil.hpp"

// Timestamped multi-channel measurement series. The CSV schema is one
// header row naming the columns; the first column is the timestamp (numeric
// seconds offset or ISO-8601 with timezone), every further column must be
// bound to a phenomenon and unit by the channel map. No quoting or embedded
// separators; see docs/ste-tst-schema.md.

namespace testkg::trace {

struct ChannelBinding {
  std::string phenomenon;  // absolute IRI
  std::string unit;
};

using ChannelMap = std::map<std::string, ChannelBinding>;

struct ChannelInfo {
  std::string name;
  std::string phenomenon;
  std::string unit;
};

struct MeasurementTrace {
  std::vector<ChannelInfo> channels;
  std::vector<double> times;              // seconds from trace start
  std::vector<std::vector<double>> rows;  // rows[i] aligned to channels
  std::optional<std::string> start_time;  // ISO-8601 when input was absolute

  // Set by callers that read the series from a file; annotation records
  // them as path + checksum triples.
  std::string source_path;
  std::string sha256;

  std::size_t sample_count() const noexcept { return times.size(); }

  std::optional<std::size_t> channel_index(std::string_view name) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
      if (channels[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> channel_by_phenomenon(std::string_view iri) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
      if (channels[i].phenomenon == iri) return i;
    return std::nullopt;
  }

  std::vector<double> column(std::size_t index) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[index]);
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::string line;
  for (char c : text) {
    if (c == '\n') {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
      line.clear();
    } else {
      line += c;
    }
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace detail

/// Parses a CSV measurement log. Every data column must appear in the
/// channel map; timestamps must be strictly increasing.
inline MeasurementTrace parse_log(std::string_view csv_text, const ChannelMap& channel_map) {
  auto lines = detail::split_lines(csv_text);
  if (lines.empty())
    throw Error(Errc::SyntaxError, "empty log: missing header row", Position{1, 1});

  auto header = detail::split_csv_row(lines[0]);
  if (header.size() < 2)
    throw Error(Errc::SyntaxError, "log header needs a time column and at least one channel",
                Position{1, 1});

  MeasurementTrace trace;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& name = header[i];
    if (name.empty())
      throw Error(Errc::SyntaxError, "empty channel name in header", Position{1, 1});
    auto it = channel_map.find(name);
    if (it == channel_map.end())
      throw Error(Errc::UnmappedColumn, "column '" + name + "' has no channel-map entry",
                  Position{1, 1});
    trace.channels.push_back(ChannelInfo{name, it->second.phenomenon, it->second.unit});
  }

  bool absolute = false;
  bool first_row = true;
  timeutil::Millis epoch = 0;
  double prev = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    auto cells = detail::split_csv_row(lines[li]);
    int line_no = static_cast<int>(li + 1);
    if (cells.size() != header.size())
      throw Error(Errc::ArityMismatch,
                  "row " + std::to_string(li) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()),
                  Position{line_no, 1});

    double t;
    auto numeric = numfmt::parse_double(cells[0]);
    if (first_row) {
      absolute = !numeric.has_value();
      if (absolute) {
        epoch = timeutil::parse_instant(cells[0]);
        trace.start_time = timeutil::format_instant(epoch);
        t = 0;
      } else {
        t = *numeric;
      }
      first_row = false;
    } else if (absolute) {
      t = static_cast<double>(timeutil::parse_instant(cells[0]) - epoch) / 1000.0;
    } else {
      if (!numeric)
        throw Error(Errc::NonNumericValue,
                    "row " + std::to_string(li) + ": bad timestamp '" + cells[0] + "'",
                    Position{line_no, 1});
      t = *numeric;
    }
    if (!trace.times.empty() && t <= prev)
      throw Error(Errc::NonMonotoneTimestamps,
                  "row " + std::to_string(li) + ": timestamp not increasing",
                  Position{line_no, 1});

    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t ci = 1; ci < cells.size(); ++ci) {
      auto v = numfmt::parse_double(cells[ci]);
      if (!v)
        throw Error(Errc::NonNumericValue,
                    "row " + std::to_string(li) + ", column '" + header[ci] + "': '" +
                        cells[ci] + "' is not a finite number",
                    Position{line_no, static_cast<int>(ci + 1)});
      values.push_back(*v);
    }
    trace.times.push_back(t);
    trace.rows.push_back(std::move(values));
    prev = t;
  }
  return trace;
}

/// Writes the trace back to the CSV schema with numeric second offsets.
/// Re-parsing yields identical channels, times, and values.
inline std::string write_log(const MeasurementTrace& trace) {
  std::string out = "time";
  for (const auto& ch : trace.channels) {
    out += ',';
    out += ch.name;
  }
  out += '\n';
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out += numfmt::format_double(trace.times[i]);
    for (double v : trace.rows[i]) {
      out += ',';
      out += numfmt::format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace testkg::trace
