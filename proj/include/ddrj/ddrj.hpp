#ifndef DDRJ_DDRJ_HPP
#define DDRJ_DDRJ_HPP

#include "ddrj/config.hpp"
#include "ddrj/datagen.hpp"
#include "ddrj/dataset.hpp"
#include "ddrj/distributions.hpp"
#include "ddrj/errors.hpp"
#include "ddrj/inference.hpp"
#include "ddrj/matrix.hpp"
#include "ddrj/model.hpp"
#include "ddrj/proposals.hpp"
#include "ddrj/rng.hpp"
#include "ddrj/sampler.hpp"
#include "ddrj/stats.hpp"

#endif
