// Copyright 2026 The resilsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace resilsim {

/// Malformed input document (dependencies file, request log).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario or config failed validation. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// HTTP fetch against a tracing backend failed.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, std::string url, int status)
        : std::runtime_error(what), url_(std::move(url)), status_(status) {}

    const std::string& url() const noexcept { return url_; }
    /// HTTP status, or 0 when no response was received.
    int status() const noexcept { return status_; }

private:
    std::string url_;
    int status_;
};

/// Exact enumeration refused because the state space is too large.
class StateLimitError : public std::runtime_error {
public:
    StateLimitError(const std::string& what, std::uint64_t states)
        : std::runtime_error(what), states_(states) {}

    /// Saturates at UINT64_MAX.
    std::uint64_t states() const noexcept { return states_; }

private:
    std::uint64_t states_;
};

}  // namespace resilsim
