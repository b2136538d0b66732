// Copyright 2026 The Seqlab Authors.
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

#ifndef SEQLAB_ERROR_HPP_
#define SEQLAB_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqlab {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input line. line() is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Tag string not in the label vocabulary. line() is 0 when not file-backed.
class VocabularyError : public Error {
 public:
  VocabularyError(std::size_t line, const std::string &what)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class OverlapError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Prediction or gold sequences do not line up. sentence() is 0-based.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t sentence, const std::string &what)
      : Error("sentence " + std::to_string(sentence) + ": " + what),
        sentence_(sentence) {}
  std::size_t sentence() const { return sentence_; }

 private:
  std::size_t sentence_;
};

// Non-finite loss or gradient during training.
class TrainingAborted : public Error {
 public:
  TrainingAborted(std::size_t step, const std::string &what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqlab

#endif  // SEQLAB_ERROR_HPP_
