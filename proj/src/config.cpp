#include "morphmt/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

const std::vector<std::pair<std::string, std::string>>& default_entries() {
  static const std::vector<std::pair<std::string, std::string>> entries = {
      {"data.dir", "data/synthetic"},
      {"data.train", "train"},
      {"data.dev", "dev"},
      {"data.test", "test"},
      {"data.source_lang", "en"},
      {"data.target_lang", "fi"},
      {"align.iterations", "5"},
      {"align.heuristic", "grow-diag-final-and"},
      {"phrase.max_words", "7"},
      {"phrase.max_morphemes", "10"},
      {"lm.word_order", "4"},
      {"lm.morph_order", "5"},
      {"lm.smoothing", "witten-bell"},
      {"decoder.beam", "100"},
      {"decoder.distortion_limit", "6"},
      {"decoder.nbest", "100"},
      {"decoder.options_per_span", "20"},
      {"mert.max_iters", "10"},
      {"mert.epsilon", "0.0001"},
      {"mert.random_directions", "1"},
      {"merge.method", "our-method"},
      {"merge.alpha", "0.6"},
      {"merge.primary", "word"},
      {"eval.threshold", "0.7"},
      {"eval.baseline", ""},
      {"eval.append_test_to_train", "false"},
      {"output.dir", "runs"},
      {"seed", "1"},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, v] : default_entries()) k.push_back(key);
    std::sort(k.begin(), k.end());
    return k;
  }();
  return keys;
}

bool Config::known_key(std::string_view key) {
  const auto& keys = known_keys();
  return std::binary_search(keys.begin(), keys.end(), key);
}

Config Config::defaults() {
  Config c;
  for (const auto& [k, v] : default_entries()) c.values_[k] = v;
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw Error("unknown config key '" + key + "'");
  values_[key] = value;
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error("override '" + std::string(assignment) + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw Error("override '" + std::string(assignment) + "' has an empty key");
  set(key, trim(assignment.substr(eq + 1)));
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config c;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!known_key(key))
      throw ParseError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'", line_no);
    c.values_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  Config c = defaults();
  c.merge(parse(read_file(path), path));
  const auto parent = std::filesystem::path(path).parent_path();
  c.base_dir_ = parent.empty() ? "." : parent.string();
  return c;
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error("missing config key '" + key + "'");
  return it->second;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw Error("config key '" + key + "': '" + v + "' is not an integer");
  return out;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    return parse_double(v);
  } catch (const Error&) {
    throw Error("config key '" + key + "': '" + v + "' is not a number");
  }
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string Config::get_path(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty()) return v;
  const std::filesystem::path p(v);
  if (p.is_absolute()) return v;
  return (std::filesystem::path(base_dir_) / p).lexically_normal().string();
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace morphmt
