#pragma once

#include <map>
#include <optional>
#include <string>

namespace vil {

// Flat key=value configuration. Keys are dotted lowercase ("mpc.q_a").
// Every key can be overridden by an environment variable with prefix
// VILSIM_ where dots become underscores and letters are uppercased
// (mpc.q_a -> VILSIM_MPC_Q_A). Environment wins over file, file wins
// over defaults supplied at the call site.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::optional<std::string> get(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  static std::string env_name(const std::string& key);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace vil
