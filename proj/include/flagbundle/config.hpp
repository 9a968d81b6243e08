#pragma once

#include "flagbundle/classify.hpp"

#include <string>

namespace flagbundle {

struct Tolerances {
    double stencil_h = 1.5e-4;
    double curvature_abs = 1e-4;
    double ratio_rel = 1e-6;
    double psi0_bound = 50.0;
    double psi0_divergence = 2.0;
    double subharmonic_tol = 1e-3;
    double witness_tol = 1e-4;
    double weakhom_witness_tol = 1e-5;
    double intertwiner_tol = 1e-9;
};

struct OperatorConfig {
    int truncation = 128;
    std::vector<WeightSequence> blocks;
    std::vector<CouplingSpec> couplings;
    ConditionAData condA;  // 0-based internally; config keys are 1-based "i,j"
    PolarGrid grid = PolarGrid::default_grid();
    Tolerances tol;
};

/// Parses and validates a JSON config; throws SchemaError carrying every
/// violation found, each with a path into the document.
OperatorConfig parse_config(const std::string& path);

/// Parses a config from an in-memory JSON string (used by tests).
OperatorConfig parse_config_text(const std::string& text, const std::string& base_dir = ".");

FlagOperator build_operator(const OperatorConfig& cfg);

/// Matrix CSV with header "row,col,re,im" and zero-based indices.
Mat read_matrix_csv(const std::string& path, int rows, int cols);
void write_matrix_csv(const std::string& path, const Mat& m);

}  // namespace flagbundle
