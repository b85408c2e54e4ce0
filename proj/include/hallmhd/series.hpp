#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hallmhd/diagnostics.hpp"

namespace hallmhd {

class SeriesError : public Error {
 public:
  using Error::Error;
};

/// Shape of a series file: which derivative and L∞ columns it carries.
struct SeriesLayout {
  int m_max = 3;       ///< u_d{j}_sq, b_d{j}_sq for j = 1..m_max+1
  int linf_order = 0;  ///< u_linf_d{j}, b_linf_d{j} for j = 0..linf_order

  static SeriesLayout of(const SampleRecord& r) {
    return {static_cast<int>(r.u_dsq.size()) - 2, static_cast<int>(r.u_linf.size()) - 1};
  }
};

// Columns, tab separated, one header line:
//   t dt energy u_l2sq b_l2sq  u_d1_sq b_d1_sq ... u_d{M+1}_sq b_d{M+1}_sq
//   u_linf_d0 b_linf_d0 ... u_l1 b_l1
//   split_radius split_e_ball split_e_total split_dissipation split_slack split_modes
inline std::vector<std::string> series_columns(const SeriesLayout& l) {
  std::vector<std::string> c = {"t", "dt", "energy", "u_l2sq", "b_l2sq"};
  for (int j = 1; j <= l.m_max + 1; ++j) {
    c.push_back("u_d" + std::to_string(j) + "_sq");
    c.push_back("b_d" + std::to_string(j) + "_sq");
  }
  for (int j = 0; j <= l.linf_order; ++j) {
    c.push_back("u_linf_d" + std::to_string(j));
    c.push_back("b_linf_d" + std::to_string(j));
  }
  for (const char* s : {"u_l1", "b_l1", "split_radius", "split_e_ball", "split_e_total",
                        "split_dissipation", "split_slack", "split_modes"}) {
    c.emplace_back(s);
  }
  return c;
}

inline std::string series_header(const SeriesLayout& l) {
  std::string out;
  for (const auto& c : series_columns(l)) {
    if (!out.empty()) out += '\t';
    out += c;
  }
  return out;
}

inline std::string series_line(const SampleRecord& r) {
  std::string out;
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += '\t';
    out += buf;
  };
  put(r.t);
  put(r.dt);
  put(r.energy());
  put(r.u_dsq.at(0));
  put(r.b_dsq.at(0));
  for (std::size_t j = 1; j < r.u_dsq.size(); ++j) {
    put(r.u_dsq[j]);
    put(r.b_dsq[j]);
  }
  for (std::size_t j = 0; j < r.u_linf.size(); ++j) {
    put(r.u_linf[j]);
    put(r.b_linf[j]);
  }
  put(r.u_l1);
  put(r.b_l1);
  put(r.split.radius);
  put(r.split.e_ball);
  put(r.split.e_total);
  put(r.split.dissipation);
  put(r.split.slack);
  put(static_cast<double>(r.split.modes_in_ball));
  return out;
}

/// Appends records to a series file, flushing each line so a failed run keeps
/// everything sampled before the failure.
class SeriesWriter {
 public:
  SeriesWriter(const std::string& path, const SeriesLayout& layout) : layout_(layout), out_(path) {
    if (!out_) throw SeriesError("cannot open series file '" + path + "'");
    out_ << series_header(layout_) << '\n';
    out_.flush();
  }

  void append(const SampleRecord& r) {
    const SeriesLayout l = SeriesLayout::of(r);
    if (l.m_max != layout_.m_max || l.linf_order != layout_.linf_order) {
      throw SeriesError("record shape does not match the series header");
    }
    out_ << series_line(r) << '\n';
    out_.flush();
    if (!out_) throw SeriesError("write to series file failed");
  }

 private:
  SeriesLayout layout_;
  std::ofstream out_;
};

inline void emit_series(const History& records, const std::string& path, const SeriesLayout& layout) {
  SeriesWriter w(path, layout);
  for (const auto& r : records) {
    w.append(r);
  }
}

/// Parses series text produced by emit_series back into records.
inline History parse_series(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw SeriesError("series is empty (no header line)");
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, '\t')) cols.push_back(c);
  }
  int m_max = -2;
  int linf_order = -1;
  for (const auto& c : cols) {
    if (c.rfind("u_d", 0) == 0 && c.size() > 6 && c.substr(c.size() - 3) == "_sq") m_max++;
    if (c.rfind("u_linf_d", 0) == 0) linf_order++;
  }
  m_max += 1;  // u_d1..u_d{M+1}: count - 1 == M
  SeriesLayout layout{m_max, linf_order};
  if (m_max < 0 || linf_order < 0 || series_columns(layout) != cols) {
    throw SeriesError("unrecognized series header");
  }
  History h;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) {
      try {
        std::size_t pos = 0;
        v.push_back(std::stod(field, &pos));
        if (pos != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw SeriesError("line " + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (v.size() != cols.size()) {
      throw SeriesError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cols.size()) + " columns, got " + std::to_string(v.size()));
    }
    SampleRecord r;
    std::size_t k = 0;
    r.t = v[k++];
    r.dt = v[k++];
    ++k;  // energy is derived
    r.u_dsq.push_back(v[k++]);
    r.b_dsq.push_back(v[k++]);
    for (int j = 1; j <= m_max + 1; ++j) {
      r.u_dsq.push_back(v[k++]);
      r.b_dsq.push_back(v[k++]);
    }
    for (int j = 0; j <= linf_order; ++j) {
      r.u_linf.push_back(v[k++]);
      r.b_linf.push_back(v[k++]);
    }
    r.u_l1 = v[k++];
    r.b_l1 = v[k++];
    r.split.radius = v[k++];
    r.split.e_ball = v[k++];
    r.split.e_total = v[k++];
    r.split.dissipation = v[k++];
    r.split.slack = v[k++];
    r.split.modes_in_ball = static_cast<std::int64_t>(v[k++]);
    h.push_back(std::move(r));
  }
  return h;
}

inline History read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SeriesError("cannot open series file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_series(ss.str());
}

}  // namespace hallmhd
