#include "intercom/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "intercom/text.hpp"

namespace intercom {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("config: bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string s = to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config: bad boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

struct Field {
  const char* key;
  std::function<void(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

template <typename T>
Field number(const char* key, T Config::*member) {
  return {key, [key, member](Config& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [member](const Config& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          }};
}

Field path(const char* key, std::filesystem::path Config::*member) {
  return {key, [member](Config& c, std::string_view v) { c.*member = std::filesystem::path(v); },
          [member](const Config& c) { return (c.*member).string(); }};
}

Field flag(const char* key, bool Config::*member) {
  return {key, [key, member](Config& c, std::string_view v) { c.*member = parse_bool(key, v); },
          [member](const Config& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      path("corpus", &Config::corpus),
      path("lexicons", &Config::lexicons),
      path("labels", &Config::labels),
      path("embeddings", &Config::embeddings),
      path("word_vectors", &Config::word_vectors),
      path("models", &Config::models),
      path("output", &Config::output),
      number("window_hours", &Config::window_hours),
      {"baseline",
       [](Config& c, std::string_view v) {
         if (to_lower(v) == "auto") c.baseline.reset();
         else c.baseline = parse_number<double>("baseline", v);
       },
       [](const Config& c) { return c.baseline ? format_double(*c.baseline) : std::string("auto"); }},
      {"baseline_statistic",
       [](Config& c, std::string_view v) {
         const std::string s = to_lower(v);
         if (s == "mean") c.baseline_statistic = BaselineStatistic::Mean;
         else if (s == "median") c.baseline_statistic = BaselineStatistic::Median;
         else throw ConfigError("config: baseline_statistic must be mean or median");
       },
       [](const Config& c) {
         return std::string(c.baseline_statistic == BaselineStatistic::Mean ? "mean" : "median");
       }},
      number("smoothing", &Config::smoothing),
      {"hosts",
       [](Config& c, std::string_view v) {
         c.hosts.clear();
         std::stringstream ss{std::string(v)};
         std::string h;
         while (std::getline(ss, h, ',')) {
           const auto t = trim(h);
           if (!t.empty()) c.hosts.push_back(to_lower(t));
         }
       },
       [](const Config& c) { return join(c.hosts); }},
      number("alpha", &Config::alpha),
      number("tol", &Config::tol),
      number("dim", &Config::dim),
      number("negatives", &Config::negatives),
      number("embed_epochs", &Config::embed_epochs),
      number("hidden", &Config::hidden),
      number("lr", &Config::lr),
      number("epochs", &Config::epochs),
      number("batch", &Config::batch),
      number("sentiment_trees", &Config::sentiment_trees),
      number("ensemble_trees", &Config::ensemble_trees),
      number("vocab", &Config::vocab),
      number("seed", &Config::seed),
      number("threads", &Config::threads),
      flag("embed", &Config::embed),
      flag("predict", &Config::predict),
  };
  return all;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

void apply_setting(Config& config, std::string_view key, std::string_view value) {
  const std::string k = to_lower(trim(key));
  for (const auto& f : fields()) {
    if (k == f.key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

Config parse_config(std::string_view text) {
  Config config;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, l.substr(0, eq), l.substr(eq + 1));
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const Config& c) {
  require(c.window_hours > 0 && c.window_hours <= 24 * 7, "window_hours must be in (0, 168]");
  require(!c.baseline || *c.baseline > 0, "baseline must be positive or auto");
  require(c.smoothing > 0 && c.smoothing <= 100, "smoothing must be in (0, 100]");
  require(c.alpha > 0 && c.alpha < 1, "alpha must be in (0, 1)");
  require(c.tol > 0 && c.tol < 1, "tol must be in (0, 1)");
  require(c.dim >= 1 && c.dim <= 4096, "dim must be in [1, 4096]");
  require(c.negatives >= 1 && c.negatives <= 100, "negatives must be in [1, 100]");
  require(c.embed_epochs >= 1 && c.embed_epochs <= 100000, "embed_epochs must be positive");
  require(c.hidden >= 1 && c.hidden <= 4096, "hidden must be in [1, 4096]");
  require(c.lr > 0 && c.lr < 10, "lr must be in (0, 10)");
  require(c.epochs >= 1 && c.epochs <= 100000, "epochs must be positive");
  require(c.batch >= 1, "batch must be positive");
  require(c.sentiment_trees >= 1 && c.ensemble_trees >= 1, "tree counts must be positive");
  require(c.vocab >= 1, "vocab must be positive");
  require(c.threads >= 1 && c.threads <= 1024, "threads must be in [1, 1024]");
  require(!c.predict || c.embed, "predict requires embed = true");
}

std::string to_string(const Config& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace intercom
