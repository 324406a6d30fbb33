#include "dflow/partition.hpp"

namespace dflow {

nlohmann::json fragment_to_json(const Fragment& f) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : f.nodes) {
        nodes.push_back({{"id", n.id},
                         {"service", n.service},
                         {"operation", n.operation},
                         {"args", n.args}});
    }
    nlohmann::json imports = nlohmann::json::array();
    for (const auto& imp : f.imports)
        imports.push_back({{"ref", imp.ref}, {"from", imp.from}, {"bytes", imp.bytes}});
    return {{"id", f.id},
            {"site", f.site},
            {"nodes", nodes},
            {"imports", imports},
            {"exports", f.exports}};
}

Fragment fragment_from_json(const nlohmann::json& j) {
    Fragment f;
    f.id = j.at("id").get<std::string>();
    f.site = j.at("site").get<std::string>();
    for (const auto& n : j.at("nodes")) {
        FragmentNode fn;
        fn.id = n.at("id").get<std::string>();
        fn.service = n.at("service").get<std::string>();
        fn.operation = n.at("operation").get<std::string>();
        fn.args = n.at("args").get<std::vector<std::string>>();
        f.nodes.push_back(std::move(fn));
    }
    for (const auto& i : j.at("imports"))
        f.imports.push_back({i.at("ref").get<std::string>(), i.at("from").get<std::string>(),
                             i.at("bytes").get<std::uint64_t>()});
    f.exports = j.at("exports").get<std::vector<std::string>>();
    return f;
}

nlohmann::json plan_to_json(const DeploymentPlan& plan) {
    nlohmann::json fragments = nlohmann::json::array();
    for (const auto& f : plan.fragments) fragments.push_back(fragment_to_json(f));
    nlohmann::json transfers = nlohmann::json::array();
    for (const auto& t : plan.transfers)
        transfers.push_back(
            {{"ref", t.ref}, {"from", t.from}, {"to", t.to}, {"bytes", t.bytes}});
    return {{"workflow", plan.workflow}, {"fragments", fragments}, {"transfers", transfers}};
}

std::string plan_to_canonical_string(const DeploymentPlan& plan) {
    return plan_to_json(plan).dump(2) + "\n";
}

PlanDoc plan_from_json(const nlohmann::json& j) {
    PlanDoc doc;
    doc.workflow = j.at("workflow").get<std::string>();
    for (const auto& f : j.at("fragments")) doc.fragments.push_back(fragment_from_json(f));
    for (const auto& t : j.at("transfers"))
        doc.transfers.push_back({t.at("ref").get<std::string>(), t.at("from").get<std::string>(),
                                 t.at("to").get<std::string>(), t.at("bytes").get<std::uint64_t>()});
    return doc;
}

}  // namespace dflow
