#include "hvac/model/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "hvac/error.hpp"

namespace hvac::model {

namespace {

constexpr const char* kMagic = "# hvac-dkf checkpoint";

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  require(r.ec == std::errc{} && r.ptr == end, "checkpoint: bad number for " + what + ": '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, const std::string& what) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  require(r.ec == std::errc{} && r.ptr == end, "checkpoint: bad integer for " + what + ": '" + s + "'");
  return v;
}

std::string layout_string(const nn::ParamLayout& l) {
  std::string out;
  for (const auto& s : l.segments()) {
    if (!out.empty()) out += ',';
    out += s.name + ':' + std::to_string(s.rows) + 'x' + std::to_string(s.cols);
  }
  return out;
}

}  // namespace

void save_checkpoint(const ModelParams& p, std::ostream& out) {
  std::string values;
  for (Eigen::Index i = 0; i < p.weights.values.size(); ++i) values += fmt(p.weights.values(i)) + '\n';
  char sum[20];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a(values)));
  out << kMagic << '\n'
      << "format_version = " << kCheckpointVersion << '\n'
      << "arch.channels = " << p.arch.channels << '\n'
      << "arch.kernel = " << p.arch.kernel << '\n'
      << "arch.hidden = " << p.arch.hidden << '\n'
      << "arch.head_hidden = " << p.arch.head_hidden << '\n'
      << "norm.offset = " << fmt(p.norm.offset) << '\n'
      << "norm.scale = " << fmt(p.norm.scale) << '\n'
      << "sigma_obs = " << fmt(p.sigma_obs) << '\n'
      << "s_process = " << fmt(p.s_process) << '\n'
      << "seed = " << p.seed << '\n'
      << "layout = " << layout_string(p.weights.layout) << '\n'
      << "n_params = " << p.weights.values.size() << '\n'
      << "checksum = " << sum << '\n'
      << "values:\n"
      << values;
}

void save_checkpoint(const ModelParams& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write checkpoint " + path.string());
  save_checkpoint(p, out);
  if (!out) throw RuntimeError("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(std::istream& in) {
  std::string line;
  require(std::getline(in, line) && trim(line) == kMagic, "checkpoint: missing header");
  std::map<std::string, std::string> kv;
  bool saw_values = false;
  while (std::getline(in, line)) {
    if (trim(line) == "values:") {
      saw_values = true;
      break;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "checkpoint: malformed header line '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  require(saw_values, "checkpoint: missing values section");
  auto get = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    require(it != kv.end(), "checkpoint: missing header key '" + k + "'");
    return it->second;
  };
  const long long version = parse_int(get("format_version"), "format_version");
  require(version == kCheckpointVersion, "checkpoint: unsupported format version " + std::to_string(version) +
                                             " (expected " + std::to_string(kCheckpointVersion) + ")");
  ModelParams p;
  p.arch.channels = static_cast<int>(parse_int(get("arch.channels"), "arch.channels"));
  p.arch.kernel = static_cast<int>(parse_int(get("arch.kernel"), "arch.kernel"));
  p.arch.hidden = static_cast<int>(parse_int(get("arch.hidden"), "arch.hidden"));
  p.arch.head_hidden = static_cast<int>(parse_int(get("arch.head_hidden"), "arch.head_hidden"));
  p.norm.offset = parse_double(get("norm.offset"), "norm.offset");
  p.norm.scale = parse_double(get("norm.scale"), "norm.scale");
  p.sigma_obs = parse_double(get("sigma_obs"), "sigma_obs");
  p.s_process = parse_double(get("s_process"), "s_process");
  p.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  require(p.sigma_obs > 0.0 && p.s_process > 0.0, "checkpoint: noise stds must be positive");
  require(p.norm.scale != 0.0, "checkpoint: zero normalization scale");

  p.weights = nn::ParamVector(make_layout(p.arch));
  require(get("layout") == layout_string(p.weights.layout), "checkpoint: layout does not match architecture");
  const long long n = parse_int(get("n_params"), "n_params");
  require(n == p.weights.values.size(), "checkpoint: parameter count mismatch");

  std::string values;
  for (long long i = 0; i < n; ++i) {
    require(static_cast<bool>(std::getline(in, line)), "checkpoint: truncated values section");
    values += line + '\n';
    p.weights.values(static_cast<Eigen::Index>(i)) = parse_double(trim(line), "value " + std::to_string(i));
  }
  char sum[20];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a(values)));
  require(get("checksum") == sum, "checkpoint: checksum mismatch");
  while (std::getline(in, line)) require(trim(line).empty(), "checkpoint: trailing data after values");
  return p;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace hvac::model
