#pragma once

#include "onsager/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace onsager {

// Bad or incomplete run configuration. `key` names the offending entry when
// there is one.
class ConfigError : public InvalidArgument {
public:
    ConfigError(std::string key, const std::string& what) : InvalidArgument(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct RunConfig {
    std::string command;
    std::string out_dir;

    double alpha = 8.0;
    std::vector<double> eps_list{4e-3};
    double sigma = 0.25;
    double theta = 0.5;
    double tol_q = 1e-8;
    double tol_el = 1e-6;
    int max_iter = 20000;
    int restarts = 4;
    int lattice_n = 64;
    double lattice_r = 3.0;
    int sphere_polar = 24;
    int sphere_azimuth = 48;
    std::string boundary_profile = "constant";
    std::uint64_t seed = 1;
    double kernel_a = kPi / 2.0;
    int dimension = 2;
    double eta_max = 20.0;
    int eta_points = 401;
    double hm_tol = 1e-10;
    int hm_max_iter = 2000000;

    // Keys present in the source text.
    std::map<std::string, std::string> given;

    // Throws ConfigError on out-of-range values.
    void validate() const;
    // key=value lines for every key, resolved values included.
    std::string manifest() const;
};

const std::vector<std::string>& config_keys();
const std::vector<std::string>& commands();
// Keys a command cannot run without.
std::vector<std::string> required_keys(const std::string& command);

// key=value lines; '#' starts a comment, blank lines are skipped. Unknown
// keys, duplicates and malformed values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Exit status of the CLI for an exception thrown by the library.
int exit_code_for(const std::exception& e);
// One-line "error code=<n> kind=<kind> [key=<key>] message=<quoted>".
std::string error_line(const std::exception& e);

// Runs `command` (or the config's command if empty) and returns the exit
// status: 0 success, 2 config error, 3 non-convergence, 4 invariant
// violation. Errors are reported as one line on `err`; the names of written
// files go to `out`.
int run(const std::string& command, const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace onsager
