#include "modnet/model_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace modnet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

void check_network(const ModuleNetwork& net) {
    const int n = net.variable_count();
    const int K = net.module_count();
    if (n < 1) throw std::invalid_argument("model has no variables");
    if (K < 1) throw std::invalid_argument("model has no modules");
    if (net.assignment.module_count != K)
        throw std::invalid_argument("assignment module count disagrees with module array");
    for (int v = 0; v < n; ++v) {
        const int j = net.assignment.module_of(v);
        if (j < 0 || j >= K)
            throw std::invalid_argument("variable " + std::to_string(v) +
                                        " assigned to out-of-range module " + std::to_string(j));
    }
    if (!net.var_names.empty() && static_cast<int>(net.var_names.size()) != n)
        throw std::invalid_argument("var_names length disagrees with assignment");
    if (net.standardization) {
        const auto& s = *net.standardization;
        if (static_cast<int>(s.means.size()) != n || static_cast<int>(s.scales.size()) != n)
            throw std::invalid_argument("standardization length disagrees with variable count");
        for (double sc : s.scales)
            if (!(sc > 0.0) || !std::isfinite(sc))
                throw std::invalid_argument("non-positive standardization scale");
        for (double mu : s.means)
            if (!std::isfinite(mu)) throw std::invalid_argument("non-finite standardization mean");
    }
    for (int j = 0; j < K; ++j) {
        const Module& mod = net.modules[j];
        mod.tree.check_structure();
        const std::set<int> tested = mod.tree.tested_vars();
        for (int v : tested)
            if (v < 0 || v >= n)
                throw std::invalid_argument("module " + std::to_string(j) +
                                            " tests out-of-range variable " + std::to_string(v));
        const std::set<int> declared(mod.parents.begin(), mod.parents.end());
        if (declared != tested)
            throw std::invalid_argument("module " + std::to_string(j) +
                                        ": parent set does not match tested variables");
        for (int id = 0; id < mod.tree.node_count(); ++id) {
            const TreeNode& node = mod.tree.node(id);
            if (node.is_leaf() && node.params) {
                if (!std::isfinite(node.params->mean) || !(node.params->variance > 0.0) ||
                    !std::isfinite(node.params->variance))
                    throw std::invalid_argument("module " + std::to_string(j) + " leaf " +
                                                std::to_string(id) + " has invalid parameters");
            }
        }
    }
    const ModuleGraph g = build_module_graph(net);
    if (auto cyc = find_cycle(g); !cyc.empty()) {
        std::string msg = "module graph is cyclic:";
        for (int m : cyc) msg += " " + std::to_string(m);
        throw CycleError(msg, cyc);
    }
}

ordered_json tree_to_json(const RegressionTree& tree) {
    ordered_json nodes = ordered_json::array();
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        ordered_json jn;
        if (n.is_leaf()) {
            jn["leaf"] = true;
            if (n.params) {
                jn["params"] = {{"mean", n.params->mean}, {"variance", n.params->variance}};
            } else {
                jn["params"] = nullptr;
            }
        } else {
            jn["leaf"] = false;
            jn["test_var"] = n.test_var;
            jn["threshold"] = n.threshold;
            jn["child_true"] = n.child_true;
            jn["child_false"] = n.child_false;
        }
        nodes.push_back(std::move(jn));
    }
    return {{"root", tree.root()}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const ordered_json& j) {
    const auto& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty())
        throw std::invalid_argument("tree nodes must be a nonempty array");
    if (j.at("root").get<int>() != 0)
        throw std::invalid_argument("tree root must be node 0");
    RegressionTree tree;
    bool first = true;
    for (const auto& jn : nodes) {
        TreeNode n;
        if (jn.at("leaf").get<bool>()) {
            const auto& p = jn.at("params");
            if (!p.is_null())
                n.params = LeafParams{p.at("mean").get<double>(), p.at("variance").get<double>()};
        } else {
            n.test_var = jn.at("test_var").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.child_true = jn.at("child_true").get<int>();
            n.child_false = jn.at("child_false").get<int>();
            if (n.test_var < 0) throw std::invalid_argument("negative test variable");
        }
        if (first) {
            tree.node(0) = n;
            first = false;
        } else {
            tree.append_node(n);
        }
    }
    return tree;
}

}  // namespace

std::string model_to_json(const ModuleNetwork& net) {
    check_network(net);
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    if (net.var_names.empty()) {
        ordered_json names = ordered_json::array();
        for (int v = 0; v < net.variable_count(); ++v) names.push_back("x" + std::to_string(v));
        j["var_names"] = std::move(names);
    } else {
        j["var_names"] = net.var_names;
    }
    j["module_count"] = net.module_count();
    j["assignment"] = net.assignment.assign;
    if (net.standardization) {
        j["standardization"] = {{"means", net.standardization->means},
                                {"scales", net.standardization->scales}};
    } else {
        j["standardization"] = nullptr;
    }
    ordered_json modules = ordered_json::array();
    for (const Module& mod : net.modules)
        modules.push_back({{"parents", mod.parents}, {"tree", tree_to_json(mod.tree)}});
    j["modules"] = std::move(modules);
    return j.dump(2) + "\n";
}

ModuleNetwork model_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion)
            throw std::runtime_error("unsupported schema version " + std::to_string(version) +
                                     " (expected " + std::to_string(kSchemaVersion) + ")");
        ModuleNetwork net;
        net.var_names = j.at("var_names").get<std::vector<std::string>>();
        net.assignment.module_count = j.at("module_count").get<int>();
        net.assignment.assign = j.at("assignment").get<std::vector<int>>();
        for (const auto& jm : j.at("modules")) {
            Module mod;
            mod.parents = jm.at("parents").get<std::vector<int>>();
            mod.tree = tree_from_json(jm.at("tree"));
            net.modules.push_back(std::move(mod));
        }
        const auto& st = j.at("standardization");
        if (!st.is_null()) {
            Standardization s;
            s.means = st.at("means").get<std::vector<double>>();
            s.scales = st.at("scales").get<std::vector<double>>();
            net.standardization = std::move(s);
        }
        check_network(net);
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model file schema violation: ") + e.what());
    }
}

void save_model(const ModuleNetwork& net, const std::string& path) {
    const std::string text = model_to_json(net);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << text;
        if (!f.flush()) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ModuleNetwork load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace modnet
