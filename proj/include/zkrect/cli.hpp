#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "zkrect/control.hpp"
#include "zkrect/potentials.hpp"
#include "zkrect/solver.hpp"

namespace zkrect::cli {

struct RunConfig {
    ProblemConfig problem;
    Grid grid;
    double delta = 0.5;
    bool nonlinear = true;
    double amplitude = 0.1;         // L2 norm of the generated u0
    double target_amplitude = 0.1;  // L2 norm of the generated uT
    int kmax = 6;                   // x-harmonics in generated fields
    std::string u0_csv, uT_csv;     // modal CSV (l, i, value); overrides generation
    ControlOptions control;
    ThetaGrid theta;
    int samples = 200;              // random fields for check-inequalities
    nlohmann::json echo;            // the filled configuration
};

// Validates every field and reports all violations in one Schema error.
RunConfig load_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

// Exit codes: 0 success, 2 hypothesis violation, 1 error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

ModalField read_modal_csv(const std::string& path, const Space& space);

}  // namespace zkrect::cli
