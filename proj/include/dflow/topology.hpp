#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dflow {

// Directed link parameters. Intra-site traffic is (0, inf).
struct LinkModel {
    double latency_s = 0.0;
    double bandwidth_Bps = std::numeric_limits<double>::infinity();
};

struct SiteDecl {
    std::string id;
    std::string host;  // socket transport only
    int port = 0;      // socket transport only
};

// Set of sites plus inter-site link parameters. Missing links fall back to
// the defaults (50 ms, 10 MB/s); intra-site links are implicit (0, inf).
class Topology {
  public:
    static constexpr double kDefaultLatencyS = 0.05;
    static constexpr double kDefaultBandwidthBps = 10.0 * 1024 * 1024;

    void add_site(const std::string& id, const std::string& host = "", int port = 0);
    void add_link(const std::string& from, const std::string& to,
                  double latency_s, double bandwidth_Bps);

    bool has_site(const std::string& id) const;
    const std::vector<SiteDecl>& sites() const { return sites_; }

    // Lookup: intra-site -> (0, inf); declared link -> as given (reverse
    // direction mirrored when only one is declared); otherwise defaults.
    LinkModel link(const std::string& from_site, const std::string& to_site) const;

    // The site hosting the orchestration service. Defaults to the first
    // declared site.
    const std::string& orchestrator_site() const;
    void set_orchestrator_site(const std::string& site);

    // File schema: {sites:[{id, host?, port?}], links:[{from, to, latency_s, bandwidth_Bps}]}
    static Topology from_json(const nlohmann::json& j);
    static Topology load_file(const std::string& path);
    nlohmann::json to_json() const;

    // s0..sN with default links everywhere; orchestrator at s0.
    static Topology uniform(int n_numbered_sites);

  private:
    std::vector<SiteDecl> sites_;
    std::map<std::pair<std::string, std::string>, LinkModel> links_;
    std::string orchestrator_site_;
};

}  // namespace dflow
