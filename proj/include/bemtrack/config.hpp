#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bemtrack/ofdm.hpp"
#include "bemtrack/types.hpp"

namespace bemtrack::sim {

/// All scalar experiment parameters. Field names double as config-file keys.
struct SimConfig {
    Index N = 64;
    Index Ng = 16;
    int K = 2;
    int frame_len = 200;
    int mc_runs = 100;
    std::vector<double> ebn0_grid_db = {5.0, 10.0, 15.0, 20.0, 25.0};
    std::optional<double> fd_hz;  // default 0.1/(Ns*Ts), resolved by doppler_hz()
    double Ts = 50e-9;
    ofdm::ConstellationKind constellation = ofdm::ConstellationKind::Qpsk;
    ofdm::ConstellationKind preamble = ofdm::ConstellationKind::Bpsk;
    Index Nc = 3;
    Eigen::Matrix2d P = Eigen::Matrix2d::Constant(0.5);
    Eigen::Vector2d mu0 = Eigen::Vector2d::Constant(0.5);
    std::uint64_t seed = 42;

    Index samples_per_symbol() const { return N + Ng; }

    /// Max Doppler in Hz; defaults to normalized Doppler 0.1 per OFDM symbol.
    double doppler_hz() const {
        if (fd_hz) {
            return *fd_hz;
        }
        return 0.1 / (static_cast<double>(samples_per_symbol()) * Ts);
    }

    ofdm::Constellation payload_constellation() const {
        return constellation == ofdm::ConstellationKind::Qpsk ? ofdm::Constellation::qpsk()
                                                              : ofdm::Constellation::bpsk();
    }
    ofdm::Constellation preamble_constellation() const {
        return preamble == ofdm::ConstellationKind::Qpsk ? ofdm::Constellation::qpsk()
                                                         : ofdm::Constellation::bpsk();
    }
};

/// Noise variance for a given Eb/N0 under unit symbol energy and unit total
/// channel power; CP overhead is not charged.
inline double sigma_w2_from_ebn0(double ebn0_db, const ofdm::Constellation& c) {
    return 1.0 / (c.bits_per_symbol * std::pow(10.0, ebn0_db / 10.0));
}

inline void validate(const SimConfig& cfg, int channel_taps = 4) {
    if (cfg.N < 2 || cfg.Ng < 1 || cfg.Ng >= cfg.N) {
        throw ConfigError("need 0 < Ng < N");
    }
    if (channel_taps >= cfg.Ng) {
        throw ConfigError("channel length must be shorter than the cyclic prefix");
    }
    if (cfg.frame_len < 4 || cfg.frame_len % 2 != 0) {
        throw ConfigError("frame_len must be even and at least 4");
    }
    if (cfg.K < 1 || cfg.K >= cfg.frame_len) {
        throw ConfigError("preamble length K out of range");
    }
    if (cfg.Nc < 1 || cfg.Nc % 2 == 0 || cfg.Nc > cfg.N) {
        throw ConfigError("Nc must be odd and at most N");
    }
    if (static_cast<Index>(cfg.K) * cfg.N < channel_taps * cfg.Nc) {
        throw ConfigError("preamble too short for acquisition rank (K*N >= L*Nc)");
    }
    if (cfg.mc_runs < 1) {
        throw ConfigError("mc_runs must be positive");
    }
    if (cfg.ebn0_grid_db.empty()) {
        throw ConfigError("ebn0_grid_db must not be empty");
    }
    if (cfg.Ts <= 0.0 || cfg.doppler_hz() < 0.0) {
        throw ConfigError("Ts must be positive and fd_hz non-negative");
    }
    if (std::abs(cfg.mu0.sum() - 1.0) > 1e-9 || cfg.mu0.minCoeff() < 0.0) {
        throw ConfigError("mu0 must be a probability vector");
    }
    for (int i = 0; i < 2; ++i) {
        if (std::abs(cfg.P.row(i).sum() - 1.0) > 1e-9 || cfg.P.row(i).minCoeff() < 0.0) {
            throw ConfigError("P rows must be probability vectors");
        }
    }
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw ConfigError("empty element in list for key '" + key + "'");
        }
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("invalid number '" + item + "' for key '" + key + "'");
        }
        if (pos != item.size()) {
            throw ConfigError("invalid number '" + item + "' for key '" + key + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw ConfigError("empty list for key '" + key + "'");
    }
    return out;
}

inline double parse_double(const std::string& value, const std::string& key) {
    const auto list = parse_double_list(value, key);
    if (list.size() != 1) {
        throw ConfigError("expected a single number for key '" + key + "'");
    }
    return list[0];
}

inline long long parse_int(const std::string& value, const std::string& key) {
    const double v = parse_double(value, key);
    const long long i = static_cast<long long>(std::llround(v));
    if (std::abs(v - static_cast<double>(i)) > 1e-12) {
        throw ConfigError("expected an integer for key '" + key + "'");
    }
    return i;
}

inline ofdm::ConstellationKind parse_constellation(const std::string& value,
                                                   const std::string& key) {
    if (value == "qpsk" || value == "QPSK") {
        return ofdm::ConstellationKind::Qpsk;
    }
    if (value == "bpsk" || value == "BPSK") {
        return ofdm::ConstellationKind::Bpsk;
    }
    throw ConfigError("key '" + key + "' must be bpsk or qpsk");
}

}  // namespace detail

/// Parses `key = value` lines ('#' comments); keys mirror SimConfig fields
/// exactly and unknown keys are rejected.
inline SimConfig parse_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        if (key == "N") {
            cfg.N = detail::parse_int(value, key);
        } else if (key == "Ng") {
            cfg.Ng = detail::parse_int(value, key);
        } else if (key == "K") {
            cfg.K = static_cast<int>(detail::parse_int(value, key));
        } else if (key == "frame_len") {
            cfg.frame_len = static_cast<int>(detail::parse_int(value, key));
        } else if (key == "mc_runs") {
            cfg.mc_runs = static_cast<int>(detail::parse_int(value, key));
        } else if (key == "ebn0_grid_db") {
            cfg.ebn0_grid_db = detail::parse_double_list(value, key);
        } else if (key == "fd_hz") {
            cfg.fd_hz = detail::parse_double(value, key);
        } else if (key == "Ts") {
            cfg.Ts = detail::parse_double(value, key);
        } else if (key == "constellation") {
            cfg.constellation = detail::parse_constellation(value, key);
        } else if (key == "preamble") {
            cfg.preamble = detail::parse_constellation(value, key);
        } else if (key == "Nc") {
            cfg.Nc = detail::parse_int(value, key);
        } else if (key == "P") {
            const auto v = detail::parse_double_list(value, key);
            if (v.size() != 4) {
                throw ConfigError("key 'P' needs 4 comma-separated values (row-major 2x2)");
            }
            cfg.P << v[0], v[1], v[2], v[3];
        } else if (key == "mu0") {
            const auto v = detail::parse_double_list(value, key);
            if (v.size() != 2) {
                throw ConfigError("key 'mu0' needs 2 comma-separated values");
            }
            cfg.mu0 << v[0], v[1];
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value, key));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse_config(in);
}

}  // namespace bemtrack::sim
