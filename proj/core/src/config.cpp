// Copyright 2026 The TeNCA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tenca/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tenca/dataset.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string field_name(const Field& f) { return f.section + "." + f.key; }

double to_double(const std::string& v, const std::string& name) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("config field '" + name + "': expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& v, const std::string& name) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("config field '" + name + "': expected a non-negative integer, got '" +
                      v + "'");
  }
  return out;
}

bool to_bool(const std::string& v, const std::string& name) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config field '" + name + "': expected true/false, got '" + v + "'");
}

Field real_field(std::string section, std::string key, double& ref) {
  const std::string name = section + "." + key;
  return {section, key, [&ref, name](const std::string& v) { ref = to_double(v, name); },
          [&ref] { return format_double(ref); }};
}

template <typename U>
Field count_field(std::string section, std::string key, U& ref) {
  const std::string name = section + "." + key;
  return {section, key,
          [&ref, name](const std::string& v) { ref = static_cast<U>(to_uint(v, name)); },
          [&ref] { return std::to_string(ref); }};
}

Field bool_field(std::string section, std::string key, bool& ref) {
  const std::string name = section + "." + key;
  return {section, key, [&ref, name](const std::string& v) { ref = to_bool(v, name); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field path_field(std::string section, std::string key, std::filesystem::path& ref) {
  return {section, key, [&ref](const std::string& v) { ref = v; },
          [&ref] { return ref.string(); }};
}

void apply(const std::string& text, std::vector<Field>& fields) {
  std::map<std::string, Field*> index;
  std::set<std::string> sections;
  for (auto& f : fields) {
    index[field_name(f)] = &f;
    sections.insert(f.section);
  }
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string name = section + "." + key;
    auto it = index.find(name);
    if (it == index.end()) throw ConfigError(where + ": unknown key '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(where + ": duplicate key '" + name + "'");
    it->second->set(value);
  }
}

std::string render(const std::vector<Field>& fields) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields) {
    if (f.section != section) {
      if (!section.empty()) out << "\n";
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get() << "\n";
  }
  return out.str();
}

std::vector<Field> train_fields(TrainConfig& c) {
  return {
      count_field("model", "channels", c.channels),
      count_field("model", "hidden", c.hidden),
      real_field("model", "fire_rate", c.fire_rate),
      real_field("time", "delta_t", c.delta_t_s),
      count_field("time", "n_steps", c.n_steps),
      real_field("optim", "learning_rate", c.learning_rate),
      real_field("optim", "beta1", c.beta1),
      real_field("optim", "beta2", c.beta2),
      real_field("optim", "adam_eps", c.adam_eps),
      real_field("optim", "grad_clip", c.grad_clip_norm),
      count_field("optim", "batch_size", c.batch_size),
      count_field("optim", "epochs", c.epochs),
      count_field("optim", "seed", c.seed),
      count_field("bptt", "segment", c.segment_length),
      bool_field("mode", "full_horizon", c.full_horizon),
      bool_field("mode", "deterministic_mask", c.deterministic_mask),
      bool_field("mode", "reproducible", c.reproducible),
  };
}

std::vector<Field> run_fields(RunConfig& c) {
  auto fields = train_fields(c.train);
  fields.push_back(count_field("run", "checkpoint_every", c.checkpoint_every));
  fields.push_back(path_field("paths", "dataset", c.dataset));
  fields.push_back(path_field("paths", "checkpoint_dir", c.checkpoint_dir));
  fields.push_back(path_field("paths", "report_dir", c.report_dir));
  return fields;
}

void class_fields(std::vector<Field>& f, const std::string& s, TissueClass& t) {
  f.push_back(count_field(s, "count_min", t.count_min));
  f.push_back(count_field(s, "count_max", t.count_max));
  f.push_back(real_field(s, "radius_min", t.radius.min));
  f.push_back(real_field(s, "radius_max", t.radius.max));
  f.push_back(real_field(s, "pre_offset", t.pre_offset));
  f.push_back(real_field(s, "amplitude_min", t.amplitude.min));
  f.push_back(real_field(s, "amplitude_max", t.amplitude.max));
  f.push_back(real_field(s, "alpha_min", t.alpha.min));
  f.push_back(real_field(s, "alpha_max", t.alpha.max));
  f.push_back(real_field(s, "beta_min", t.beta.min));
  f.push_back(real_field(s, "beta_max", t.beta.max));
}

std::vector<Field> datagen_fields(DataGenSpec& d) {
  PhantomSpec& p = d.phantom;
  std::vector<Field> f = {
      count_field("dataset", "cases", d.cases),
      count_field("dataset", "first_case_id", d.first_case_id),
      count_field("dataset", "seed", p.seed),
      bool_field("dataset", "normalize", d.normalize),
      count_field("dataset", "crop_size", d.crop_size),
      count_field("phantom", "height", p.height),
      count_field("phantom", "width", p.width),
      real_field("phantom", "background", p.background),
      real_field("phantom", "background_variation", p.background_variation),
      real_field("phantom", "noise_sigma", p.noise_sigma),
      count_field("acquisition", "k_min", p.k_min),
      count_field("acquisition", "k_max", p.k_max),
      real_field("acquisition", "max_time", p.max_time_s),
      real_field("acquisition", "delta_t", p.delta_t_s),
  };
  class_fields(f, "gland", p.gland);
  class_fields(f, "lesion", p.lesion);
  return f;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  auto fields = run_fields(c);
  apply(text, fields);
  c.train.validate();
  return c;
}

std::string format_run_config(const RunConfig& config) {
  RunConfig copy = config;
  return render(run_fields(copy));
}

std::string format_train_config(const TrainConfig& config) {
  TrainConfig copy = config;
  return render(train_fields(copy));
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  auto fields = train_fields(c);
  apply(text, fields);
  c.validate();
  return c;
}

std::uint64_t config_hash(const TrainConfig& config) {
  TrainConfig c = config;
  c.epochs = 0;
  c.segment_length = kDefaultSegment;
  c.reproducible = false;
  const std::string text = format_train_config(c);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool operator==(const DataGenSpec& a, const DataGenSpec& b) {
  return format_datagen_spec(a) == format_datagen_spec(b);
}

DataGenSpec parse_datagen_spec(const std::string& text) {
  DataGenSpec d;
  auto fields = datagen_fields(d);
  apply(text, fields);
  d.phantom.validate();
  if (d.cases == 0) throw ConfigError("invalid phantom field 'dataset.cases': must be >= 1");
  if (d.crop_size != 0 && (d.crop_size > d.phantom.height || d.crop_size > d.phantom.width)) {
    throw ConfigError("invalid phantom field 'dataset.crop_size': larger than the image");
  }
  return d;
}

std::string format_datagen_spec(const DataGenSpec& spec) {
  DataGenSpec copy = spec;
  return render(datagen_fields(copy));
}

std::string read_text_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path,
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace tenca
