#include "ncac/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ncac/format.hpp"
#include "ncac/json_util.hpp"

namespace ncac::jsonu {

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& key : required)
        if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    for (const auto& item : obj.items()) {
        const std::string& k = item.key();
        const bool known =
            std::find(required.begin(), required.end(), k) != required.end() ||
            std::find(optional.begin(), optional.end(), k) != optional.end();
        if (!known) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

namespace {
const json& fetch(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(where + ": missing key '" + key + "'");
    return obj.at(key);
}
} // namespace

double get_double(const json& obj, const std::string& where, const std::string& key) {
    const json& v = fetch(obj, where, key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

double get_double_or(const json& obj, const std::string& where, const std::string& key,
                     double fallback) {
    if (!obj.contains(key)) return fallback;
    return get_double(obj, where, key);
}

long get_int(const json& obj, const std::string& where, const std::string& key) {
    const json& v = fetch(obj, where, key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    return v.get<long>();
}

long get_int_or(const json& obj, const std::string& where, const std::string& key,
                long fallback) {
    if (!obj.contains(key)) return fallback;
    return get_int(obj, where, key);
}

std::uint64_t get_uint64_or(const json& obj, const std::string& where, const std::string& key,
                            std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0))
        throw ConfigError(where + "." + key + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

bool get_bool_or(const json& obj, const std::string& where, const std::string& key,
                 bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key) {
    const json& v = fetch(obj, where, key);
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::string get_string_or(const json& obj, const std::string& where, const std::string& key,
                          const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    return get_string(obj, where, key);
}

} // namespace ncac::jsonu

namespace ncac::io {

using jsonu::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

// --- causal network ----------------------------------------------------------

CausalNetwork load_network(const std::filesystem::path& path) {
    const json j = jsonu::parse_file(path);
    const std::string where = path.filename().string();
    jsonu::check_keys(j, where, {"n", "nodes", "edges"}, {});

    CausalNetwork net;
    net.n = static_cast<int>(jsonu::get_int(j, where, "n"));
    if (net.n < 1) throw ConfigError(where + ": n must be >= 1");

    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || static_cast<int>(nodes.size()) != net.n)
        throw ConfigError(where + ": nodes must be an array of n entries");
    net.nodes.resize(net.n);
    std::vector<bool> seen(net.n, false);
    for (std::size_t idx = 0; idx < nodes.size(); ++idx) {
        const std::string nwhere = where + ".nodes[" + std::to_string(idx) + "]";
        jsonu::check_keys(nodes[idx], nwhere, {"id", "kind"}, {"theta", "beta"});
        const int id = static_cast<int>(jsonu::get_int(nodes[idx], nwhere, "id"));
        if (id < 0 || id >= net.n) throw ConfigError(nwhere + ": id out of range");
        if (seen[id]) throw ConfigError(nwhere + ": duplicate id " + std::to_string(id));
        seen[id] = true;
        NodeMechanism& nd = net.nodes[id];
        nd.kind = node_kind_from_string(jsonu::get_string(nodes[idx], nwhere, "kind"));
        nd.theta = jsonu::get_double_or(nodes[idx], nwhere, "theta", 0.0);
        if (nodes[idx].contains("beta") && !nodes[idx].at("beta").is_null())
            nd.beta = jsonu::get_double(nodes[idx], nwhere, "beta");
    }

    const json& edges = j.at("edges");
    if (!edges.is_array()) throw ConfigError(where + ": edges must be an array");
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const std::string ewhere = where + ".edges[" + std::to_string(idx) + "]";
        jsonu::check_keys(edges[idx], ewhere, {"src", "dst", "w"}, {});
        Edge e;
        e.src = static_cast<int>(jsonu::get_int(edges[idx], ewhere, "src"));
        e.dst = static_cast<int>(jsonu::get_int(edges[idx], ewhere, "dst"));
        e.weight = jsonu::get_double(edges[idx], ewhere, "w");
        net.edges.push_back(e);
    }
    validate(net);
    return net;
}

void save_network(const CausalNetwork& net, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "{\n  \"n\": " << net.n << ",\n  \"nodes\": [\n";
    for (int i = 0; i < net.n; ++i) {
        const NodeMechanism& nd = net.nodes[i];
        out << "    {\"id\": " << i << ", \"kind\": \"" << to_string(nd.kind)
            << "\", \"theta\": " << fmt12(nd.theta) << ", \"beta\": "
            << (nd.beta ? fmt12(*nd.beta) : std::string("null")) << "}"
            << (i + 1 < net.n ? "," : "") << "\n";
    }
    out << "  ],\n  \"edges\": [\n";
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        out << "    {\"src\": " << net.edges[e].src << ", \"dst\": " << net.edges[e].dst
            << ", \"w\": " << fmt12(net.edges[e].weight) << "}"
            << (e + 1 < net.edges.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    write_file(path, out.str());
}

// --- TPM CSV -------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_double(const std::string& cell, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (...) {
        throw ConfigError(where + ": bad number '" + cell + "'");
    }
}

} // namespace

Tpm load_tpm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    const std::string where = path.filename().string();

    std::string line;
    if (!std::getline(in, line)) throw ConfigError(where + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "node")
        throw ConfigError(where + ": header must start with 'node'");
    const std::size_t n_states = header.size() - 1;
    for (std::size_t s = 0; s < n_states; ++s)
        if (header[s + 1] != "s" + std::to_string(s))
            throw ConfigError(where + ": header column " + std::to_string(s + 1) +
                              " must be s" + std::to_string(s));

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        const std::string lwhere = where + ":" + std::to_string(line_no);
        if (cells.size() != header.size())
            throw ConfigError(lwhere + ": expected " + std::to_string(header.size()) +
                              " cells, got " + std::to_string(cells.size()));
        if (cells[0] != std::to_string(rows.size()))
            throw ConfigError(lwhere + ": expected node " + std::to_string(rows.size()) +
                              ", got '" + cells[0] + "'");
        std::vector<double> row;
        row.reserve(n_states);
        for (std::size_t s = 0; s < n_states; ++s) {
            const double v = parse_double(cells[s + 1], lwhere);
            if (!(v >= 0.0 && v <= 1.0))
                throw ConfigError(lwhere + ": probability " + cells[s + 1] +
                                  " outside [0, 1]");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }

    const int n = static_cast<int>(rows.size());
    if (n < 1) throw ConfigError(where + ": no node rows");
    if (n_states != (std::size_t{1} << n))
        throw ConfigError(where + ": " + std::to_string(n) + " node rows need 2^" +
                          std::to_string(n) + " state columns, got " +
                          std::to_string(n_states));
    Tpm tpm;
    tpm.n = n;
    tpm.cond.resize(n, static_cast<Eigen::Index>(n_states));
    for (int i = 0; i < n; ++i)
        for (std::size_t s = 0; s < n_states; ++s) tpm.cond(i, s) = rows[i][s];
    return tpm;
}

void save_tpm(const Tpm& tpm, const std::filesystem::path& path) {
    std::ostringstream out;
    const Eigen::Index n_states = tpm.cond.cols();
    out << "node";
    for (Eigen::Index s = 0; s < n_states; ++s) out << ",s" << s;
    out << "\n";
    for (int i = 0; i < tpm.n; ++i) {
        out << i;
        for (Eigen::Index s = 0; s < n_states; ++s) out << "," << fmt12(tpm.cond(i, s));
        out << "\n";
    }
    write_file(path, out.str());
}

// --- plain matrices -------------------------------------------------------------

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    const std::string where = path.filename().string();

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const std::string& cell : cells)
            row.push_back(parse_double(cell, where + ":" + std::to_string(line_no)));
        if (!rows.empty() && row.size() != rows[0].size())
            throw ConfigError(where + ":" + std::to_string(line_no) + ": ragged row (" +
                              std::to_string(row.size()) + " vs " +
                              std::to_string(rows[0].size()) + " cells)");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(where + ": empty matrix");

    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[0].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
    std::ostringstream out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << (c ? "," : "") << fmt12(m(r, c));
        out << "\n";
    }
    write_file(path, out.str());
}

// --- spiking network -------------------------------------------------------------

namespace {

LifParams lif_from_json(const json& j, const std::string& where) {
    jsonu::check_keys(j, where, {},
                      {"tau_m", "v_rest", "v_reset", "v_th", "r_m", "t_ref", "dt"});
    LifParams p;
    p.tau_m = jsonu::get_double_or(j, where, "tau_m", p.tau_m);
    p.v_rest = jsonu::get_double_or(j, where, "v_rest", p.v_rest);
    p.v_reset = jsonu::get_double_or(j, where, "v_reset", p.v_reset);
    p.v_th = jsonu::get_double_or(j, where, "v_th", p.v_th);
    p.r_m = jsonu::get_double_or(j, where, "r_m", p.r_m);
    p.t_ref = jsonu::get_double_or(j, where, "t_ref", p.t_ref);
    p.dt = jsonu::get_double_or(j, where, "dt", p.dt);
    return p;
}

} // namespace

SpikingNetwork load_spiking_network(const std::filesystem::path& path) {
    const json j = jsonu::parse_file(path);
    const std::string where = path.filename().string();
    jsonu::check_keys(j, where, {"n", "lif", "edges"}, {"allow_self"});

    const int n = static_cast<int>(jsonu::get_int(j, where, "n"));
    if (n < 1) throw ConfigError(where + ": n must be >= 1");
    const bool allow_self = jsonu::get_bool_or(j, where, "allow_self", false);

    const json& lif = j.at("lif");
    SpikingNetwork net;
    if (lif.is_array()) {
        if (static_cast<int>(lif.size()) != n)
            throw ConfigError(where + ".lif: need one entry per neuron");
        net = make_lif_network(
            n, lif_from_json(lif[0], where + ".lif[0]"), allow_self);
        for (int i = 0; i < n; ++i)
            net.lif[i] = lif_from_json(lif[i], where + ".lif[" + std::to_string(i) + "]");
        net.membrane = Eigen::VectorXd::NullaryExpr(
            n, [&](Eigen::Index i) { return net.lif[i].v_rest; });
    } else {
        net = make_lif_network(n, lif_from_json(lif, where + ".lif"), allow_self);
    }

    const json& edges = j.at("edges");
    if (!edges.is_array()) throw ConfigError(where + ": edges must be an array");
    for (std::size_t idx = 0; idx < edges.size(); ++idx) {
        const std::string ewhere = where + ".edges[" + std::to_string(idx) + "]";
        jsonu::check_keys(edges[idx], ewhere, {"src", "dst", "w"}, {"delay"});
        const int src = static_cast<int>(jsonu::get_int(edges[idx], ewhere, "src"));
        const int dst = static_cast<int>(jsonu::get_int(edges[idx], ewhere, "dst"));
        if (src < 0 || src >= n)
            throw ConfigError(ewhere + ": src=" + std::to_string(src) +
                              " out of range for n=" + std::to_string(n));
        if (dst < 0 || dst >= n)
            throw ConfigError(ewhere + ": dst=" + std::to_string(dst) +
                              " out of range for n=" + std::to_string(n));
        if (src == dst && !allow_self)
            throw ConfigError(ewhere + ": self-synapse needs allow_self=true");
        const long delay = jsonu::get_int_or(edges[idx], ewhere, "delay", 1);
        if (delay < 1) throw ConfigError(ewhere + ": delay must be >= 1 step");
        net.weights(dst, src) = jsonu::get_double(edges[idx], ewhere, "w");
        net.delays(dst, src) = static_cast<int>(delay);
    }
    validate(net);
    return net;
}

void save_spiking_network(const SpikingNetwork& net, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "{\n  \"n\": " << net.n << ",\n  \"allow_self\": "
        << (net.allow_self ? "true" : "false") << ",\n  \"lif\": [\n";
    for (int i = 0; i < net.n; ++i) {
        const LifParams& p = net.lif[i];
        out << "    {\"tau_m\": " << fmt12(p.tau_m) << ", \"v_rest\": " << fmt12(p.v_rest)
            << ", \"v_reset\": " << fmt12(p.v_reset) << ", \"v_th\": " << fmt12(p.v_th)
            << ", \"r_m\": " << fmt12(p.r_m) << ", \"t_ref\": " << fmt12(p.t_ref)
            << ", \"dt\": " << fmt12(p.dt) << "}" << (i + 1 < net.n ? "," : "") << "\n";
    }
    out << "  ],\n  \"edges\": [";
    bool first = true;
    for (int dst = 0; dst < net.n; ++dst)
        for (int src = 0; src < net.n; ++src) {
            if (net.weights(dst, src) == 0.0) continue;
            out << (first ? "\n" : ",\n") << "    {\"src\": " << src << ", \"dst\": " << dst
                << ", \"w\": " << fmt12(net.weights(dst, src))
                << ", \"delay\": " << net.delays(dst, src) << "}";
            first = false;
        }
    out << (first ? "" : "\n  ") << "]\n}\n";
    write_file(path, out.str());
}

// --- rasters and state sequences ---------------------------------------------------

void save_raster(const SpikeRaster& raster, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "step,neuron\n";
    for (int t = 0; t < raster.steps; ++t)
        for (int i = 0; i < raster.n; ++i)
            if (raster.spikes(t, i)) out << t << "," << i << "\n";
    write_file(path, out.str());
}

void save_states(const std::vector<StateIndex>& states, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "bin,state\n";
    for (std::size_t b = 0; b < states.size(); ++b) out << b << "," << states[b] << "\n";
    write_file(path, out.str());
}

// --- result files --------------------------------------------------------------------

void save_phi_result(const PhiResult& res, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "{\n  \"state\": " << res.state << ",\n  \"phi\": " << fmt12(res.phi)
        << ",\n  \"direction\": \"" << to_string(res.direction) << "\",\n  \"unreachable\": "
        << (res.unreachable ? "true" : "false") << ",\n  \"mip\": {\"a\": " << res.mip.part_a
        << ", \"b\": " << res.mip.part_b << "},\n  \"partitions\": [";
    for (std::size_t c = 0; c < res.per_partition.size(); ++c) {
        const PartitionEi& p = res.per_partition[c];
        out << (c ? ",\n" : "\n") << "    {\"a\": " << p.cut.part_a << ", \"b\": "
            << p.cut.part_b << ", \"ei\": " << fmt12(p.ei) << ", \"nei\": "
            << fmt12(p.normalized_ei) << "}";
    }
    out << (res.per_partition.empty() ? "" : "\n  ") << "]\n}\n";
    write_file(path, out.str());
}

void save_phi_bar(const PhiBarResult& res, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "state,phi,weight\n";
    for (const PhiBarEntry& e : res.per_state)
        out << e.state << "," << fmt12(e.phi) << "," << fmt12(e.weight) << "\n";
    write_file(path, out.str());
}

void save_pci_result(const PciResult& res, const std::array<double, 2>& reference_band,
                     const std::filesystem::path& path) {
    std::ostringstream out;
    out << "{\n  \"pci\": " << fmt12(res.pci) << ",\n  \"lz\": " << res.lz_count
        << ",\n  \"length\": " << res.length << ",\n  \"entropy\": "
        << fmt12(res.source_entropy) << ",\n  \"k\": " << fmt12(res.k)
        << ",\n  \"reference_band\": [" << fmt12(reference_band[0]) << ", "
        << fmt12(reference_band[1]) << "]\n}\n";
    write_file(path, out.str());
}

void save_binary_matrix(
    const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& m,
    const std::filesystem::path& path) {
    std::ostringstream out;
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out << (c ? "," : "") << static_cast<int>(m(t, c));
        out << "\n";
    }
    write_file(path, out.str());
}

void save_trace(const AdaptationTrace& trace, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "eval,loss,phi,stop_reason\n";
    for (std::size_t r = 0; r < trace.rows.size(); ++r) {
        const TraceRow& row = trace.rows[r];
        out << row.eval << "," << fmt12(row.loss) << "," << fmt12(row.phi) << ","
            << (r + 1 == trace.rows.size() ? trace.stop_reason : "") << "\n";
    }
    write_file(path, out.str());
}

} // namespace ncac::io
