#pragma once

// Umbrella header: pulls in the whole library.

#include "seqpred/adversary.hpp"
#include "seqpred/alphabet.hpp"
#include "seqpred/biased.hpp"
#include "seqpred/cover.hpp"
#include "seqpred/dinf.hpp"
#include "seqpred/divergence.hpp"
#include "seqpred/errors.hpp"
#include "seqpred/experiments.hpp"
#include "seqpred/format.hpp"
#include "seqpred/hidden_chain.hpp"
#include "seqpred/logprob.hpp"
#include "seqpred/measure_json.hpp"
#include "seqpred/measures.hpp"
#include "seqpred/mixture.hpp"
#include "seqpred/process.hpp"
#include "seqpred/report.hpp"
#include "seqpred/rng.hpp"
#include "seqpred/sequence_rule.hpp"
#include "seqpred/total_variation.hpp"
