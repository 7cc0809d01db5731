// Copyright 2026 The EMFF Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace emff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two dipoles closer than the far-field floor.
class FarFieldViolation : public Error {
 public:
  FarFieldViolation(const std::string& what, int j, int k, double distance)
      : Error(what), j_(j), k_(k), distance_(distance) {}
  int j() const { return j_; }
  int k() const { return k_; }
  double distance() const { return distance_; }

 private:
  int j_;
  int k_;
  double distance_;
};

// Relative-dynamics or field model used outside its domain.
class ModelValidity : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class NoFeasibleSolution : public Error {
 public:
  NoFeasibleSolution(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace emff
