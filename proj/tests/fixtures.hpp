#pragma once

// Shared PDDL fixtures: nondeterministic tire domains at desk-check scale.

namespace fixtures {

// Spiked-road world: moving may flatten a tire; changing it consumes the
// spare stored at the location.
inline const char *kTireDomain = R"((define (domain triangle-tireworld)
  (:requirements :strips :typing :negative-preconditions :non-deterministic)
  (:types location)
  (:predicates (road ?from - location ?to - location)
               (vAt ?loc - location)
               (flat)
               (spare-in ?loc - location))
  (:action move
    :parameters (?from - location ?to - location)
    :precondition (and (vAt ?from) (road ?from ?to) (not (flat)))
    :effect (oneof (and (vAt ?to) (not (vAt ?from)))
                   (and (vAt ?to) (not (vAt ?from)) (flat))))
  (:action changetire
    :parameters (?loc - location)
    :precondition (and (vAt ?loc) (spare-in ?loc) (flat))
    :effect (and (not (flat)) (not (spare-in ?loc))))))";

// Three-row triangle: 11-21-31 base, 12-22 middle, 13 top. The only road
// into 22 leaves from 21.
inline const char *kTireProblem3Row = R"((define (problem triangle-tire-a)
  (:domain triangle-tireworld)
  (:objects 11 21 31 12 22 13 - location)
  (:init (and (vAt 11) (road 11 21) (road 21 31) (road 11 12) (road 21 22)
              (road 12 13) (spare-in 21) (spare-in 12)))
  (:goal (and (vAt 22)))))";

// Five-row triangle: base 11..51, apex 15. Roads run along the base, up the
// middle ladder, and out to the 33 and 15 corners; every location except the
// start stocks a spare.
inline const char *kTireProblem5Row = R"((define (problem triangle-tire-b)
  (:domain triangle-tireworld)
  (:objects 11 21 31 41 51 12 22 32 42 13 23 33 14 24 15 - location)
  (:init (and (vAt 11)
              (road 11 21) (road 21 31) (road 31 41) (road 41 51)
              (road 21 22) (road 22 23) (road 23 33) (road 23 24)
              (road 24 15)
              (spare-in 21) (spare-in 31) (spare-in 41) (spare-in 51)
              (spare-in 12) (spare-in 22) (spare-in 32) (spare-in 42)
              (spare-in 13) (spare-in 23) (spare-in 33) (spare-in 14)
              (spare-in 24) (spare-in 15)))
  (:goal (and (vAt 51)))))";

// Retry variant: a flat strands you in place, changing the tire never
// consumes anything, so every route can flat-loop forever.
inline const char *kRetryDomain = R"((define (domain tireworld-retry)
  (:requirements :strips :typing :negative-preconditions :non-deterministic)
  (:types location)
  (:predicates (road ?from - location ?to - location)
               (vAt ?loc - location)
               (flat))
  (:action move
    :parameters (?from - location ?to - location)
    :precondition (and (vAt ?from) (road ?from ?to) (not (flat)))
    :effect (oneof (and (vAt ?to) (not (vAt ?from))) (flat)))
  (:action changetire
    :parameters (?loc - location)
    :precondition (and (vAt ?loc) (flat))
    :effect (not (flat)))))";

inline const char *kRetryProblem = R"((define (problem retry-a)
  (:domain tireworld-retry)
  (:objects 11 21 - location)
  (:init (and (vAt 11) (road 11 21)))
  (:goal (and (vAt 21)))))";

// Independent reversible switches: every on/off combination is reachable
// from every other, so goals over any atom order stay solvable.
inline const char *kSwitchDomain = R"((define (domain switch-world)
  (:requirements :strips :typing :negative-preconditions :non-deterministic)
  (:types switch)
  (:predicates (on ?s - switch) (off ?s - switch))
  (:action turn-on
    :parameters (?s - switch)
    :precondition (and (off ?s))
    :effect (and (on ?s) (not (off ?s))))
  (:action turn-off
    :parameters (?s - switch)
    :precondition (and (on ?s))
    :effect (and (off ?s) (not (on ?s))))))";

inline const char *kSwitchProblem = R"((define (problem switch-a)
  (:domain switch-world)
  (:objects s1 s2 s3 s4 s5 - switch)
  (:init (and (off s1) (off s2) (off s3) (off s4) (off s5)))
  (:goal (and (on s1)))))";

}  // namespace fixtures
