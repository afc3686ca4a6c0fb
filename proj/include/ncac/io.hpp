#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ncac/adaptation.hpp"
#include "ncac/network.hpp"
#include "ncac/pci.hpp"
#include "ncac/phi.hpp"
#include "ncac/snn.hpp"

// File formats. All floating-point output goes through fmt12 (12 significant
// digits), so a rerun with the same inputs and seed reproduces results byte
// for byte. Loaders validate strictly and report the offending entry.
namespace ncac::io {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a 64-bit over a byte string; digests for manifests and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Causal network JSON:
// {"n": int, "nodes": [{"id", "kind", "theta"?, "beta"?}], "edges": [{"src", "dst", "w"}]}
CausalNetwork load_network(const std::filesystem::path& path);
void save_network(const CausalNetwork& net, const std::filesystem::path& path);

// TPM CSV with header node,s0,...,s{2^n-1}: one row per node.
Tpm load_tpm(const std::filesystem::path& path);
void save_tpm(const Tpm& tpm, const std::filesystem::path& path);

// Headerless rectangular CSV of doubles (stimulus, weights).
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

// Spiking network JSON:
// {"n": int, "lif": {...} | [{...} x n], "edges": [{"src", "dst", "w", "delay"?}],
//  "allow_self"?: bool}
// Lif objects take tau_m, v_rest, v_reset, v_th, r_m, t_ref, dt (all optional,
// defaults as in LifParams). Delays are in steps, default 1.
SpikingNetwork load_spiking_network(const std::filesystem::path& path);
// Emits one edge per nonzero weight (a zero-weight synapse's custom delay is
// not round-tripped).
void save_spiking_network(const SpikingNetwork& net, const std::filesystem::path& path);

// Raster CSV: header step,neuron; one row per spike in time-major order.
void save_raster(const SpikeRaster& raster, const std::filesystem::path& path);

// Binarized state sequence CSV: header bin,state.
void save_states(const std::vector<StateIndex>& states, const std::filesystem::path& path);

// Single-state result JSON (schema mirrored by load in report).
void save_phi_result(const PhiResult& res, const std::filesystem::path& path);

// State-average CSV: header state,phi,weight.
void save_phi_bar(const PhiBarResult& res, const std::filesystem::path& path);

void save_pci_result(const PciResult& res, const std::array<double, 2>& reference_band,
                     const std::filesystem::path& path);

// 0/1 matrix, rows = time, columns = channels, no header.
void save_binary_matrix(
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& m,
    const std::filesystem::path& path);

// Optimization trace CSV: header eval,loss,phi,stop_reason (reason filled on
// the final row only).
void save_trace(const AdaptationTrace& trace, const std::filesystem::path& path);

} // namespace ncac::io
