#pragma once

#include <stdexcept>
#include <string>

namespace dflow {

// Base class for all runtime failures raised by the engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownSiteError : Error {
    explicit UnknownSiteError(const std::string& site)
        : Error("unknown site: " + site), site(site) {}
    std::string site;
};

struct MissingSizeError : Error {
    MissingSizeError(const std::string& service, const std::string& op)
        : Error("no payload size for " + service + "." + op),
          service(service), operation(op) {}
    std::string service;
    std::string operation;
};

struct TooLargeError : Error {
    using Error::Error;
};

struct CycleError : Error {
    using Error::Error;
};

struct EndpointUnknownError : Error {
    explicit EndpointUnknownError(const std::string& endpoint)
        : Error("unknown endpoint: " + endpoint), endpoint(endpoint) {}
    std::string endpoint;
};

struct ConnectionLostError : Error {
    using Error::Error;
};

struct LivelockError : Error {
    using Error::Error;
};

struct ProxyUnreachableError : Error {
    explicit ProxyUnreachableError(const std::string& site)
        : Error("proxy unreachable for site " + site), site(site) {}
    std::string site;
};

struct ServiceUnreachableError : Error {
    explicit ServiceUnreachableError(const std::string& service)
        : Error("service unreachable: " + service), service(service) {}
    std::string service;
};

struct FragmentFailedError : Error {
    FragmentFailedError(const std::string& fragment, const std::string& reason)
        : Error("fragment " + fragment + " failed: " + reason),
          fragment(fragment), reason(reason) {}
    std::string fragment;
    std::string reason;
};

struct TimeoutError : Error {
    using Error::Error;
};

}  // namespace dflow
