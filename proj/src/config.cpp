#include "qodc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qodc/csv.hpp"
#include "qodc/errors.hpp"

namespace qodc {

namespace pt = boost::property_tree;

SweepConfig::SweepConfig() {
  for (int i = 0; i <= 20; ++i) alphas.push_back(i / 20.0);
}

void ExperimentConfig::validate() const {
  env.validate();
  ppo.validate();
  if (nn.hidden.empty()) throw ConfigError("nn: need at least one hidden layer");
  for (auto h : nn.hidden) {
    if (h < 1) throw ConfigError("nn: hidden widths must be >= 1");
  }
  if (!(nn.log_std_init >= kLogStdMin && nn.log_std_init <= kLogStdMax)) {
    throw ConfigError("nn: log_std_init outside [-5, 1]");
  }
  if (oracle.f_points < 2 || oracle.r_points < 2) throw ConfigError("oracle: need >= 2 points");
  if (oracle.refine_rounds < 0) throw ConfigError("oracle: refine_rounds must be >= 0");
  if (!(oracle.shrink > 0.0 && oracle.shrink <= 1.0)) throw ConfigError("oracle: shrink in (0, 1]");
  if (eval.states < 0) throw ConfigError("eval: states must be >= 0");
  if (sweep.states < 1) throw ConfigError("sweep: states must be >= 1");
  for (double a : sweep.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep: alphas must lie in [0, 1]");
  }
  if (seeds.empty()) throw ConfigError("experiment: seed list is empty");
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, std::string text) {
  text = trim(std::move(text));
  T v{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("config: bad value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, std::string text) {
  text = trim(std::move(text));
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: bad boolean '" + text + "' for " + key);
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

// Field table keyed by "section.key"; drives both parsing and serialization.
const std::vector<std::pair<std::string, Field>>& fields() {
  auto dbl = [](auto member_of) {
    return Field{[member_of](ExperimentConfig& c, const std::string& v) {
                   member_of(c) = parse_number<double>("value", v);
                 },
                 [member_of](const ExperimentConfig& c) {
                   return format_double(member_of(c));
                 }};
  };
  auto integer = [](auto member_of) {
    return Field{[member_of](ExperimentConfig& c, const std::string& v) {
                   using T = std::remove_reference_t<decltype(member_of(c))>;
                   member_of(c) = parse_number<T>("value", v);
                 },
                 [member_of](const ExperimentConfig& c) {
                   return std::to_string(member_of(c));
                 }};
  };
  static const std::vector<std::pair<std::string, Field>> table = {
      {"env.devices", integer([](auto& c) -> auto& { return c.env.device_count; })},
      {"env.types", integer([](auto& c) -> auto& { return c.env.type_count; })},
      {"env.phi_min", dbl([](auto& c) -> auto& { return c.env.phi_range.lo; })},
      {"env.phi_max", dbl([](auto& c) -> auto& { return c.env.phi_range.hi; })},
      {"env.cap_min", dbl([](auto& c) -> auto& { return c.env.cap_range.lo; })},
      {"env.cap_max", dbl([](auto& c) -> auto& { return c.env.cap_range.hi; })},
      {"env.alpha", dbl([](auto& c) -> auto& { return c.env.alpha; })},
      {"env.unit_profit", dbl([](auto& c) -> auto& { return c.env.unit_profit; })},
      {"env.penalty", dbl([](auto& c) -> auto& { return c.env.penalty; })},
      {"env.data_size_bits",
       dbl([](auto& c) -> auto& { return c.env.data_size_bits; })},
      {"env.rate_bps", dbl([](auto& c) -> auto& { return c.env.rate_bps; })},
      {"env.f_min", dbl([](auto& c) -> auto& { return c.env.f_min; })},
      {"env.r_max", dbl([](auto& c) -> auto& { return c.env.r_max; })},
      {"env.horizon", integer([](auto& c) -> auto& { return c.env.horizon; })},
      {"ppo.gamma", dbl([](auto& c) -> auto& { return c.ppo.gamma; })},
      {"ppo.clip_epsilon", dbl([](auto& c) -> auto& { return c.ppo.clip_epsilon; })},
      {"ppo.value_coef", dbl([](auto& c) -> auto& { return c.ppo.value_coef; })},
      {"ppo.minibatch_size",
       integer([](auto& c) -> auto& { return c.ppo.minibatch_size; })},
      {"ppo.update_epochs", integer([](auto& c) -> auto& { return c.ppo.update_epochs; })},
      {"ppo.episodes", integer([](auto& c) -> auto& { return c.ppo.episodes; })},
      {"ppo.learning_rate",
       dbl([](auto& c) -> auto& { return c.ppo.learning_rate; })},
      {"ppo.normalize_advantages",
       Field{[](ExperimentConfig& c, const std::string& v) {
               c.ppo.normalize_advantages = parse_bool("ppo.normalize_advantages", v);
             },
             [](const ExperimentConfig& c) {
               return std::string(c.ppo.normalize_advantages ? "true" : "false");
             }}},
      {"nn.hidden",
       Field{[](ExperimentConfig& c, const std::string& v) {
               c.nn.hidden = parse_list<std::size_t>("nn.hidden", v);
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (auto h : c.nn.hidden) parts.push_back(std::to_string(h));
               return join(parts);
             }}},
      {"nn.log_std_init", dbl([](auto& c) -> auto& { return c.nn.log_std_init; })},
      {"oracle.f_points",
       integer([](auto& c) -> auto& { return c.oracle.f_points; })},
      {"oracle.r_points",
       integer([](auto& c) -> auto& { return c.oracle.r_points; })},
      {"oracle.refine_rounds",
       integer([](auto& c) -> auto& { return c.oracle.refine_rounds; })},
      {"oracle.shrink", dbl([](auto& c) -> auto& { return c.oracle.shrink; })},
      {"eval.states", integer([](auto& c) -> auto& { return c.eval.states; })},
      {"eval.seed", integer([](auto& c) -> auto& { return c.eval.seed; })},
      {"sweep.alphas",
       Field{[](ExperimentConfig& c, const std::string& v) {
               c.sweep.alphas = parse_list<double>("sweep.alphas", v);
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (double a : c.sweep.alphas) parts.push_back(format_double(a));
               return join(parts);
             }}},
      {"sweep.states", integer([](auto& c) -> auto& { return c.sweep.states; })},
      {"sweep.mode",
       Field{[](ExperimentConfig& c, const std::string& v) {
               const auto t = trim(v);
               if (t == "oracle") {
                 c.sweep.mode = SweepMode::Oracle;
               } else if (t == "train") {
                 c.sweep.mode = SweepMode::Train;
               } else {
                 throw ConfigError("sweep.mode must be 'oracle' or 'train'");
               }
             },
             [](const ExperimentConfig& c) {
               return std::string(c.sweep.mode == SweepMode::Oracle ? "oracle" : "train");
             }}},
      {"experiment.output_dir",
       Field{[](ExperimentConfig& c, const std::string& v) { c.output_dir = trim(v); },
             [](const ExperimentConfig& c) { return c.output_dir; }}},
      {"experiment.seeds",
       Field{[](ExperimentConfig& c, const std::string& v) {
               c.seeds = parse_list<std::uint64_t>("experiment.seeds", v);
             },
             [](const ExperimentConfig& c) {
               std::vector<std::string> parts;
               for (auto s : c.seeds) parts.push_back(std::to_string(s));
               return join(parts);
             }}},
  };
  return table;
}

void sync_derived(ExperimentConfig& c) {
  c.oracle.f_min = c.env.f_min;
  c.oracle.r_max = c.env.r_max;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  std::map<std::string, const Field*> by_key;
  for (const auto& [key, field] : fields()) by_key[key] = &field;

  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const auto full = section + "." + key;
      const auto it = by_key.find(full);
      if (it == by_key.end()) throw ConfigError("config: unknown key " + full);
      try {
        it->second->set(config, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (" + full + ")");
      }
    }
  }
  sync_derived(config);
  try {
    config.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string current;
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    const auto section = key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out += '\n';
      out += "[" + section + "]\n";
      current = section;
    }
    out += key.substr(dot + 1) + " = " + field.get(config) + "\n";
  }
  return out;
}

}  // namespace qodc
