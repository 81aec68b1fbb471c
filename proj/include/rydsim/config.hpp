#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rydsim {

/// Flat key = value run description. Keys are dotted lowercase
/// (material.m_e_eff, plasma.rho, ensemble.n_traj); '#' starts a comment;
/// list values are comma separated. All physical inputs are SI.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key, double dflt) const;
    long get_long(const std::string& key, long dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& dflt) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    /// Keys that were never read; used to reject typos at startup.
    std::vector<std::string> unused_keys() const;
    /// Canonical text form (sorted), used for the provenance hash.
    std::string canonical() const;
    std::uint64_t hash() const;  // FNV-1a of canonical()

  private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> touched_;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rydsim
