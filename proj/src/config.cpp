#include "pdbal/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace pdbal {

namespace {

using nlohmann::json;

struct TomlParser {
  explicit TomlParser(const std::string& text) : in(text) {}

  json parse() {
    doc = json::object();
    current = &doc;
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      strip_comment(line);
      trim(line);
      if (line.empty()) continue;
      if (line.rfind("[[", 0) == 0) {
        header(line, /*array=*/true);
      } else if (line[0] == '[') {
        header(line, /*array=*/false);
      } else {
        keyvalue(line);
      }
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("TOML line " + std::to_string(lineno) + ": " + msg);
  }

  static void trim(std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }

  static void strip_comment(std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
      if (s[i] == '#' && !in_string) {
        s.resize(i);
        return;
      }
    }
  }

  std::vector<std::string> split_key(const std::string& key) const {
    std::vector<std::string> parts;
    std::string part;
    bool quoted = false;
    for (char c : key) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == '.' && !quoted) {
        trim(part);
        if (part.empty()) fail("empty key segment");
        parts.push_back(part);
        part.clear();
      } else {
        part.push_back(c);
      }
    }
    trim(part);
    if (part.empty()) fail("empty key segment");
    parts.push_back(part);
    return parts;
  }

  void header(const std::string& line, bool array) {
    const std::size_t open = array ? 2 : 1;
    const std::string close = array ? "]]" : "]";
    const auto end = line.rfind(close);
    if (end == std::string::npos || end + close.size() != line.size())
      fail("malformed table header");
    const auto parts = split_key(line.substr(open, end - open));
    json* node = &doc;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const bool last = i + 1 == parts.size();
      if (last && array) {
        json& arr = (*node)[parts[i]];
        if (arr.is_null()) arr = json::array();
        if (!arr.is_array()) fail("key already used as a non-array");
        arr.push_back(json::object());
        node = &arr.back();
      } else {
        json& next = (*node)[parts[i]];
        if (next.is_null()) next = json::object();
        if (next.is_array()) {
          if (next.empty()) fail("cannot descend into empty array");
          node = &next.back();
        } else if (next.is_object()) {
          node = &next;
        } else {
          fail("key already holds a scalar");
        }
        continue;
      }
    }
    current = node;
  }

  void keyvalue(const std::string& line) {
    const auto eq = find_unquoted(line, '=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    trim(key);
    trim(value);
    if (key.empty()) fail("empty key");
    const auto parts = split_key(key);
    json* node = current;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      json& next = (*node)[parts[i]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("dotted key collides with a scalar");
      node = &next;
    }
    if (node->contains(parts.back())) fail("duplicate key " + parts.back());
    (*node)[parts.back()] = parse_value(value);
  }

  static std::size_t find_unquoted(const std::string& s, char target) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
      if (s[i] == target && !quoted) return i;
    }
    return std::string::npos;
  }

  json parse_value(const std::string& raw) const {
    if (raw.empty()) fail("empty value");
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') fail("unterminated string");
      std::string out;
      for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        if (raw[i] == '\\' && i + 2 < raw.size()) {
          ++i;
          switch (raw[i]) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: fail("unsupported escape");
          }
        } else {
          out.push_back(raw[i]);
        }
      }
      return out;
    }
    if (raw.front() == '[') {
      if (raw.back() != ']') fail("unterminated array");
      json arr = json::array();
      std::string inner = raw.substr(1, raw.size() - 2);
      std::string item;
      bool quoted = false;
      for (char c : inner) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
          trim(item);
          if (!item.empty()) arr.push_back(parse_value(item));
          item.clear();
        } else {
          item.push_back(c);
        }
      }
      trim(item);
      if (!item.empty()) arr.push_back(parse_value(item));
      return arr;
    }
    if (raw == "true") return true;
    if (raw == "false") return false;
    // TOML permits underscores in numbers.
    std::string cleaned;
    for (char c : raw)
      if (c != '_') cleaned.push_back(c);
    try {
      if (cleaned.find_first_of(".eE") == std::string::npos &&
          cleaned.find_first_not_of("+-0123456789") == std::string::npos)
        return std::stoll(cleaned);
      std::size_t used = 0;
      const double v = std::stod(cleaned, &used);
      if (used == cleaned.size()) return v;
    } catch (const std::exception&) {
    }
    fail("cannot parse value: " + raw);
  }

  std::istringstream in;
  json doc;
  json* current = nullptr;
  int lineno = 0;
};

json merge_with_defaults(const json& defaults, const json& user,
                         const std::string& path) {
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key))
      throw ConfigError("unknown config key: " + path + key);
    if (defaults[key].is_object()) {
      if (!value.is_object())
        throw ConfigError("config key " + path + key + " must be a table");
      out[key] = merge_with_defaults(defaults[key], value, path + key + ".");
    } else {
      out[key] = value;
    }
  }
  return out;
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config key " + key + " must be numeric");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw ConfigError("config key " + key + " must be an integer");
  return v.get<int>();
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) {
  return TomlParser(text).parse();
}

nlohmann::json load_config_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml")
    return parse_toml_subset(text);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::string part;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(part);
      part.clear();
    } else {
      part.push_back(c);
    }
  }
  parts.push_back(part);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
    if (value.is_object() || value.is_array()) value = raw;
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }

  if (!doc.contains("scenario") || !doc["scenario"].is_array())
    throw ConfigError("config must contain a scenario array");

  // The path must name a key in the canonical schema.
  nlohmann::json probe = scenario_defaults();
  const nlohmann::json* check = &probe;
  for (const auto& p : parts) {
    if (!check->is_object() || !check->contains(p))
      throw ConfigError("override references unknown key: " + path);
    check = &(*check)[p];
  }

  for (auto& scenario : doc["scenario"]) {
    nlohmann::json* target = &scenario;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i)
      target = &(*target)[parts[i]];
    (*target)[parts.back()] = value;
  }
}

nlohmann::json scenario_defaults() {
  return nlohmann::json{
      {"name", "scenario"},
      {"family", "logistic"},
      {"noise_var", 0.0625},
      {"phi", 10.0},
      {"distance", "first"},
      {"euclid_scale", 4.0},
      {"influence_half_dim", 0},
      {"influence_ref_size", 2000},
      {"d", 10},
      {"mix_p", 0.1},
      {"pool_size", 2000},
      {"n_queries", 40},
      {"m_samples", 300},
      {"prior_var", 1.0},
      {"seed", 0},
      {"n_seeds", 1},
      {"acquisition",
       {{"strategy", "PDBAL"}, {"n_mc", 10000}, {"eig_nodes", 64}}},
      {"mcmc",
       {{"chains", 2}, {"burn_in", 750}, {"thin", 5}, {"target_accept", 0.234}}},
  };
}

ScenarioConfig parse_scenario(const nlohmann::json& entry) {
  const nlohmann::json cfg =
      merge_with_defaults(scenario_defaults(), entry, "");
  ScenarioConfig out;
  out.name = cfg["name"].get<std::string>();

  const std::string family = cfg["family"].get<std::string>();
  if (family == "linear_gaussian" || family == "gaussian" || family == "linear")
    out.family = LikelihoodFamily::linear_gaussian(
        as_number(cfg["noise_var"], "noise_var"));
  else if (family == "logistic")
    out.family = LikelihoodFamily::logistic();
  else if (family == "poisson")
    out.family = LikelihoodFamily::poisson();
  else if (family == "beta" || family == "beta_mean")
    out.family = LikelihoodFamily::beta_mean(as_number(cfg["phi"], "phi"));
  else
    throw ConfigError("unknown family: " + family);

  const std::string distance = cfg["distance"].get<std::string>();
  if (distance == "first")
    out.distance_kind = DistanceSpec::Kind::First;
  else if (distance == "max")
    out.distance_kind = DistanceSpec::Kind::Max;
  else if (distance == "kendall")
    out.distance_kind = DistanceSpec::Kind::Kendall;
  else if (distance == "euclidean")
    out.distance_kind = DistanceSpec::Kind::EuclideanScaled;
  else if (distance == "influence")
    out.distance_kind = DistanceSpec::Kind::Influence;
  else
    throw ConfigError("unknown distance: " + distance);

  out.euclid_scale = as_number(cfg["euclid_scale"], "euclid_scale");
  out.influence_half_dim = as_int(cfg["influence_half_dim"], "influence_half_dim");
  out.influence_ref_size = as_int(cfg["influence_ref_size"], "influence_ref_size");
  out.d = as_int(cfg["d"], "d");
  out.mix_p = as_number(cfg["mix_p"], "mix_p");
  out.pool_size = as_int(cfg["pool_size"], "pool_size");
  out.n_queries = as_int(cfg["n_queries"], "n_queries");
  out.m_samples = as_int(cfg["m_samples"], "m_samples");
  out.prior_var = as_number(cfg["prior_var"], "prior_var");
  out.seed = cfg["seed"].get<std::uint64_t>();
  out.n_seeds = as_int(cfg["n_seeds"], "n_seeds");

  const auto& acq = cfg["acquisition"];
  out.acquisition.strategy =
      strategy_from_string(acq["strategy"].get<std::string>());
  out.acquisition.n_mc = as_int(acq["n_mc"], "acquisition.n_mc");
  out.acquisition.eig_nodes = as_int(acq["eig_nodes"], "acquisition.eig_nodes");

  const auto& mcmc = cfg["mcmc"];
  out.mcmc.chains = as_int(mcmc["chains"], "mcmc.chains");
  out.mcmc.burn_in = as_int(mcmc["burn_in"], "mcmc.burn_in");
  out.mcmc.thin = as_int(mcmc["thin"], "mcmc.thin");
  out.mcmc.target_accept = as_number(mcmc["target_accept"], "mcmc.target_accept");

  if (out.d < 2) throw ConfigError("d must be >= 2");
  if (out.mix_p < 0.0 || out.mix_p > 1.0)
    throw ConfigError("mix_p must lie in [0,1]");
  if (out.pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (out.n_queries < 0) throw ConfigError("n_queries must be >= 0");
  if (out.m_samples < 3) throw ConfigError("m_samples must be >= 3");
  if (out.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (out.acquisition.n_mc < 1) throw ConfigError("acquisition.n_mc must be >= 1");
  return out;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("scenario") ||
      !doc["scenario"].is_array() || doc["scenario"].empty())
    throw ConfigError("config must contain a nonempty scenario array");
  RunConfig run;
  for (const auto& entry : doc["scenario"])
    run.scenarios.push_back(parse_scenario(entry));
  return run;
}

}  // namespace pdbal
