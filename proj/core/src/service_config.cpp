#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "catbox/errors.hpp"
#include "catbox/service.hpp"

namespace catbox::service {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_value(const std::string& raw, int line) {
  if (raw.empty()) throw Error("config line " + std::to_string(line) + ": missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      throw Error("config line " + std::to_string(line) + ": unterminated string");
    }
    return raw.substr(1, raw.size() - 2);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  long long iv = 0;
  auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), iv);
  if (ec == std::errc() && p == raw.data() + raw.size()) return iv;
  double dv = 0.0;
  auto [p2, ec2] = std::from_chars(raw.data(), raw.data() + raw.size(), dv);
  if (ec2 == std::errc() && p2 == raw.data() + raw.size()) return dv;
  throw Error("config line " + std::to_string(line) + ": cannot parse value '" + raw + "'");
}

int parse_port(const std::string& s, const std::string& origin) {
  int port = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), port);
  if (ec != std::errc() || p != s.data() + s.size() || port < 0 || port > 65535) {
    throw Error(origin + ": invalid port '" + s + "'");
  }
  return port;
}

bool known_engine_key(const std::string& key) {
  auto flat = config_to_json(CampaignConfig{});
  return key != "kernel" && flat.contains(key);
}

bool known_kernel_key(const std::string& key) {
  auto flat = config_to_json(CampaignConfig{});
  return flat.at("kernel").contains(key);
}

}  // namespace

ServiceConfig parse_service_config(const std::string& text, ServiceConfig config) {
  std::istringstream in(text);
  std::string line_text;
  std::string section;
  nlohmann::json engine = nlohmann::json::object();
  int line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    std::string s = trim(strip_comment(line_text));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error("config line " + std::to_string(line) + ": bad section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "engine" && section != "engine.kernel") {
        throw Error("config line " + std::to_string(line) + ": unknown section [" + section + "]");
      }
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error("config line " + std::to_string(line) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    nlohmann::json value = parse_value(trim(s.substr(eq + 1)), line);
    std::string where = "config line " + std::to_string(line);
    if (section.empty()) {
      if (key == "host") {
        config.host = value.get<std::string>();
      } else if (key == "port") {
        if (!value.is_number_integer()) throw Error(where + ": port must be an integer");
        config.port = parse_port(std::to_string(value.get<long long>()), where);
      } else if (key == "store_root") {
        config.store_root = value.get<std::string>();
      } else if (key == "static_dir") {
        config.static_dir = value.get<std::string>();
      } else {
        throw Error(where + ": unknown key '" + key + "'");
      }
    } else if (section == "engine") {
      if (!known_engine_key(key)) throw Error(where + ": unknown engine key '" + key + "'");
      engine[key] = value;
    } else {
      if (!known_kernel_key(key)) throw Error(where + ": unknown kernel key '" + key + "'");
      engine["kernel"][key] = value;
    }
  }
  try {
    config.engine = config_from_json(engine, config.engine);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config [engine]: ") + e.what());
  }
  return config;
}

ServiceConfig apply_env(ServiceConfig config,
                        const std::function<const char*(const char*)>& getenv) {
  if (const char* v = getenv("CATBOX_HOST"); v && *v) config.host = v;
  if (const char* v = getenv("CATBOX_PORT"); v && *v) config.port = parse_port(v, "CATBOX_PORT");
  if (const char* v = getenv("CATBOX_STORE_ROOT"); v && *v) config.store_root = v;
  if (const char* v = getenv("CATBOX_STATIC_DIR"); v && *v) config.static_dir = std::filesystem::path(v);
  return config;
}

}  // namespace catbox::service
