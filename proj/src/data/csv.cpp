#include "hvac/data/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <unordered_map>

#include "hvac/error.hpp"

namespace hvac::data {

namespace {

constexpr std::array<std::string_view, 7> kRequired = {"seq_id", "minute", "t_obs", "t_out",
                                                       "a_h",    "a_vent", "a_ac"};

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line_no, std::string_view column) {
  field = trim(field);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("line " + std::to_string(line_no) + ": cannot parse " +
                          std::string(column) + " value '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw ValidationError("line " + std::to_string(line_no) + ": non-finite " +
                          std::string(column) + " value");
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::size_t line_no, std::string_view column) {
  field = trim(field);
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("line " + std::to_string(line_no) + ": cannot parse " +
                          std::string(column) + " value '" + std::string(field) + "'");
  }
  return v;
}

bool parse_flag(std::string_view field, std::size_t line_no, std::string_view column) {
  const auto v = parse_int(field, line_no, column);
  if (v != 0 && v != 1) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + std::string(column) +
                          " must be 0 or 1");
  }
  return v == 1;
}

}  // namespace

void write_csv(const Dataset& dataset, std::ostream& out) {
  const bool truth = dataset.has_truth();
  bool labels = !dataset.empty();
  for (const auto& s : dataset.sequences) labels = labels && s.has_noise_label();

  out << "seq_id,minute,t_obs";
  if (truth) out << ",t_true";
  out << ",t_out,a_h,a_vent,a_ac";
  if (labels) out << ",noise_std";
  out << '\n';

  char buf[256];
  for (const auto& s : dataset.sequences) {
    s.validate();
    for (std::size_t i = 0; i < s.size(); ++i) {
      int n = std::snprintf(buf, sizeof buf, "%lld,%zu,%.6f", static_cast<long long>(s.id), i,
                            s.t_obs[i]);
      out.write(buf, n);
      if (truth) {
        n = std::snprintf(buf, sizeof buf, ",%.6f", s.t_true[i]);
        out.write(buf, n);
      }
      const auto& c = s.control[i];
      n = std::snprintf(buf, sizeof buf, ",%.6f,%d,%d,%d", s.t_out[i], c.a_h ? 1 : 0,
                        c.a_vent ? 1 : 0, c.a_ac ? 1 : 0);
      out.write(buf, n);
      if (labels) {
        n = std::snprintf(buf, sizeof buf, ",%.6f", s.noise_std);
        out.write(buf, n);
      }
      out.put('\n');
    }
  }
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open '" + path.string() + "' for writing");
  write_csv(dataset, out);
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV: missing header");
  const auto header = split(trim(line));
  std::unordered_map<std::string_view, std::size_t> col;
  std::vector<std::string> names(header.begin(), header.end());
  for (std::size_t i = 0; i < names.size(); ++i) {
    names[i] = std::string(trim(names[i]));
    if (!col.emplace(names[i], i).second) {
      throw ValidationError("malformed header: duplicate column '" + names[i] + "'");
    }
  }
  for (auto req : kRequired) {
    if (!col.contains(req)) {
      throw ValidationError("malformed header: missing required column '" + std::string(req) + "'");
    }
  }
  const auto opt = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    return it == col.end() ? std::nullopt : std::optional(it->second);
  };
  const auto c_truth = opt("t_true");
  const auto c_noise = opt("noise_std");

  Dataset ds;
  std::unordered_map<std::int64_t, std::size_t> index_of;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row_text = trim(line);
    if (row_text.empty()) continue;
    const auto f = split(row_text);
    if (f.size() != names.size()) {
      throw ValidationError("line " + std::to_string(line_no) + ": ragged row (" +
                            std::to_string(f.size()) + " fields, header has " +
                            std::to_string(names.size()) + ")");
    }
    const auto id = parse_int(f[col.at("seq_id")], line_no, "seq_id");
    auto [it, inserted] = index_of.emplace(id, ds.sequences.size());
    if (inserted) {
      ds.sequences.emplace_back();
      ds.sequences.back().id = id;
    }
    Sequence& s = ds.sequences[it->second];
    const auto minute = parse_int(f[col.at("minute")], line_no, "minute");
    if (minute != static_cast<std::int64_t>(s.size())) {
      throw ValidationError("line " + std::to_string(line_no) + ": sequence " +
                            std::to_string(id) + " expects minute " + std::to_string(s.size()) +
                            ", got " + std::to_string(minute));
    }
    s.t_obs.push_back(parse_double(f[col.at("t_obs")], line_no, "t_obs"));
    s.t_out.push_back(parse_double(f[col.at("t_out")], line_no, "t_out"));
    if (c_truth) s.t_true.push_back(parse_double(f[*c_truth], line_no, "t_true"));
    sim::ControlState c;
    c.a_h = parse_flag(f[col.at("a_h")], line_no, "a_h");
    c.a_vent = parse_flag(f[col.at("a_vent")], line_no, "a_vent");
    c.a_ac = parse_flag(f[col.at("a_ac")], line_no, "a_ac");
    s.control.push_back(c);
    if (c_noise) {
      const double sigma = parse_double(f[*c_noise], line_no, "noise_std");
      if (s.size() == 1) {
        s.noise_std = sigma;
      } else if (sigma != s.noise_std) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": noise_std changes within sequence " + std::to_string(id));
      }
    }
  }
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

void write_metadata(const Dataset& dataset, const std::filesystem::path& csv_path) {
  auto meta_path = csv_path;
  meta_path += ".meta";
  std::ofstream out(meta_path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open '" + meta_path.string() + "' for writing");
  for (const auto& [k, v] : dataset.meta) out << k << " = " << v << '\n';
}

}  // namespace hvac::data
