#include "dflow/topology.hpp"

#include <fstream>

#include "dflow/errors.hpp"

namespace dflow {

void Topology::add_site(const std::string& id, const std::string& host, int port) {
    if (has_site(id)) return;
    sites_.push_back({id, host, port});
    if (orchestrator_site_.empty()) orchestrator_site_ = id;
}

void Topology::add_link(const std::string& from, const std::string& to,
                        double latency_s, double bandwidth_Bps) {
    links_[{from, to}] = LinkModel{latency_s, bandwidth_Bps};
}

bool Topology::has_site(const std::string& id) const {
    for (const auto& s : sites_)
        if (s.id == id) return true;
    return false;
}

LinkModel Topology::link(const std::string& from_site, const std::string& to_site) const {
    if (from_site == to_site) return LinkModel{};  // intra-site: (0, inf)
    auto it = links_.find({from_site, to_site});
    if (it != links_.end()) return it->second;
    it = links_.find({to_site, from_site});  // mirror a one-way declaration
    if (it != links_.end()) return it->second;
    return LinkModel{kDefaultLatencyS, kDefaultBandwidthBps};
}

const std::string& Topology::orchestrator_site() const { return orchestrator_site_; }

void Topology::set_orchestrator_site(const std::string& site) {
    if (!has_site(site)) throw UnknownSiteError(site);
    orchestrator_site_ = site;
}

Topology Topology::from_json(const nlohmann::json& j) {
    Topology t;
    if (!j.is_object() || !j.contains("sites") || !j["sites"].is_array())
        throw Error("topology: expected an object with a 'sites' array");
    for (const auto& s : j["sites"]) {
        t.add_site(s.at("id").get<std::string>(),
                   s.value("host", std::string{}),
                   s.value("port", 0));
    }
    for (const auto& l : j.value("links", nlohmann::json::array())) {
        const auto from = l.at("from").get<std::string>();
        const auto to = l.at("to").get<std::string>();
        if (!t.has_site(from)) throw UnknownSiteError(from);
        if (!t.has_site(to)) throw UnknownSiteError(to);
        double lat = l.value("latency_s", kDefaultLatencyS);
        double bw = l.value("bandwidth_Bps", kDefaultBandwidthBps);
        if (lat < 0) throw Error("topology: negative latency on " + from + "->" + to);
        if (bw <= 0) throw Error("topology: non-positive bandwidth on " + from + "->" + to);
        t.add_link(from, to, lat, bw);
    }
    return t;
}

Topology Topology::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open topology file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("topology file " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json Topology::to_json() const {
    nlohmann::json j;
    j["sites"] = nlohmann::json::array();
    for (const auto& s : sites_) {
        nlohmann::json site{{"id", s.id}};
        if (!s.host.empty()) site["host"] = s.host;
        if (s.port) site["port"] = s.port;
        j["sites"].push_back(site);
    }
    j["links"] = nlohmann::json::array();
    for (const auto& [key, l] : links_) {
        j["links"].push_back({{"from", key.first},
                              {"to", key.second},
                              {"latency_s", l.latency_s},
                              {"bandwidth_Bps", l.bandwidth_Bps}});
    }
    return j;
}

Topology Topology::uniform(int n_numbered_sites) {
    Topology t;
    for (int i = 0; i <= n_numbered_sites; ++i) t.add_site("s" + std::to_string(i));
    return t;
}

}  // namespace dflow
