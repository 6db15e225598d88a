#pragma once

#include <stdexcept>
#include <string>

namespace reactree {

// Invalid configuration supplied by the caller (flags, env vars, budgets).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed world, task, or manifest file.
class WorldLoadError : public std::runtime_error {
public:
    explicit WorldLoadError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or incompatible episodic store file.
class StoreError : public std::runtime_error {
public:
    explicit StoreError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scripted transcript miss or malformed transcript file. These indicate a
// broken test fixture and are never converted into in-episode failures.
class ScriptError : public std::runtime_error {
public:
    explicit ScriptError(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote endpoint unreachable after the retry schedule was exhausted.
class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed trace file handed to replay or render.
class TraceError : public std::runtime_error {
public:
    explicit TraceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace reactree
