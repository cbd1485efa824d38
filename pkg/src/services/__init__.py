"""Numerical services: q-calculus, recurrences, measures, operators, type-B Gram computations"""
