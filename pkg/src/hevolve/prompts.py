"""Prompt templates for the generator and reflector roles.

The wording is part of the search protocol: the reflector's two-phase
output structure (Analysis/Experience, then Keywords/Advice/Avoid/
Explanation) and the better/worse ordering in the crossover prompt are
what the engine parses and relies on. Personas rotate round-robin during
initialization to push the generator toward varied designs.
"""

from __future__ import annotations

import ast

PERSONAS = (
    "You are an expert in the domain of optimization heuristics",
    "You are Albert Einstein, relativity theory developer",
    "You are Isaac Newton, the father of physics",
    "You are Marie Curie, pioneer in radioactivity",
    "You are Nikola Tesla, master of electricity",
    "You are Galileo Galilei, champion of heliocentrism",
    "You are Stephen Hawking, black hole theorist",
    "You are Richard Feynman, quantum mechanics genius",
    "You are Rosalind Franklin, DNA structure revealer",
    "You are Ada Lovelace, computer programming pioneer",
)

_TIP = "I'm going to tip $999K for a better heuristics! Let's think step by step."


def generator_system(persona: str) -> str:
    return (
        f"{persona} helping to design heuristics that can effectively solve "
        "optimization problems.\n\n"
        "Your response outputs Python code and nothing else. Format your code "
        "as a Python code string: ```python ... ```."
    )


def task_description(persona: str, function_name: str, problem_description: str,
                     function_description: str) -> str:
    return (
        f"{persona}. Your task is to write a {function_name} function for "
        f"{problem_description}\n\n{function_description}"
    )


def init_user(task: str, seed_function: str, function_name: str) -> str:
    return (
        f"{task}\n\n```python\n{seed_function}\n```\n\n"
        "Refer to the format of a trivial design above. Be very creative and "
        f"give `{function_name}_v2`. Output code only and enclose your code "
        "with Python code block: ```python ... ```."
    )


def reflector_system() -> str:
    return (
        "You are an expert in the domain of optimization heuristics. Your task "
        "is to provide useful advice based on analysis to design better "
        "heuristics."
    )


def analysis_user(ranked_heuristics: str) -> str:
    """Phase-1 reflection: deep analysis over a best-to-worst ranked list."""
    return (
        "### List heuristics\n\n"
        "Below is a list of design heuristics ranked from best to worst.\n\n"
        f"{ranked_heuristics}\n\n"
        "### Guide\n\n"
        "- Keep in mind, list of design heuristics ranked from best to worst. "
        "Meaning the first function in the list is the best and the last "
        "function in the list is the worst.\n\n"
        "- The response in Markdown style and nothing else has the following "
        "structure:\n\n"
        "'**Analysis:**\n\n**Experience:**'\n\n"
        "In there:\n\n"
        "+ Meticulously analyze comments, docstrings and source code of "
        "several pairs (Better code - Worse code) in List heuristics to fill "
        "values for **Analysis:**.\n\n"
        "Example: \"Comparing (best) vs (worst), we see ...; (second best) vs "
        "(second worst) ...; Comparing (1st) vs (2nd), we see ...; (3rd) vs "
        "(4th) ...; Comparing (worst) vs (second worst), we see ...; "
        "Overall:...\"\n\n"
        "+ Self-reflect to extract useful experience for design better "
        "heuristics and fill to **Experience:** (<60 words).\n\n"
        f"{_TIP}"
    )


def guide_user(current_analysis: str, good_reflections: list[str],
               bad_reflections: list[str]) -> str:
    """Phase-2 reflection: synthesize a guide against accumulated history."""
    good = "\n\n".join(good_reflections)
    bad = "\n\n".join(bad_reflections)
    return (
        "Your task is to redefine 'Current self-reflection' paying attention "
        "to avoid all things in 'Ineffective self-reflection' in order to "
        "come up with ideas to design better heuristics.\n\n"
        "### Current self-reflection\n\n"
        f"{current_analysis}\n\n{good}\n\n"
        "### Ineffective self-reflection\n\n"
        f"{bad}\n\n"
        "Response (<100 words) should have 4 bullet points: Keywords, Advice, "
        "Avoid, Explanation.\n\n"
        f"{_TIP}"
    )


def crossover_user(task: str, better_signature: str, better_code: str,
                   worse_signature: str, worse_code: str, guide: str,
                   function_name: str) -> str:
    return (
        f"{task}\n\n"
        "### Better code\n\n"
        f"{better_signature}\n\n```python\n{better_code}\n```\n\n"
        "### Worse code\n\n"
        f"{worse_signature}\n\n```python\n{worse_code}\n```\n\n"
        "### Analyze & experience\n\n"
        f"- {guide}\n\n"
        f"Your task is to write an improved function `{function_name}_v2` by "
        "COMBINING elements of two above heuristics base Analyze & "
        "experience.\n\n"
        "Output the code within a Python code block: ```python ... ```, has "
        "comment and docstring (<50 words) to description key idea of "
        "heuristics design.\n\n"
        f"{_TIP}"
    )


def mutation_user(task: str, elite_signature: str, elite_code: str,
                  analysis: str, function_name: str) -> str:
    return (
        f"{task}\n\n"
        "Current heuristics:\n\n"
        f"{elite_signature}\n\n```python\n{elite_code}\n```\n\n"
        f"Now, think outside the box write a mutated function "
        f"`{function_name}_v2` better than current version. You can using "
        "some hints if need:\n\n"
        f"{analysis}\n\n"
        "Output code only and enclose your code with Python code block: "
        "```python ... ```.\n\n"
        "I'm going to tip $999K for a better solution!"
    )


def parameter_extraction_system() -> str:
    return (
        "You are an expert in code review. Your task extract all threshold, "
        "weight or hardcode variable of the function make it become default "
        "parameters."
    )


def parameter_extraction_user(elite_code: str) -> str:
    return (
        f"```python\n{elite_code}\n```\n\n"
        "Now extract all threshold, weight or hardcode variable of the "
        "function make it become default parameters and give me a "
        "'parameter_ranges' dictionary representation. Key of dict is name of "
        "variable. Value of key is a tuple in Python MUST include 2 float "
        "elements, first element is begin value, second element is end value "
        "corresponding with parameter.\n\n"
        "- Output code only and enclose your code with Python code block: "
        "```python ... ```.\n\n"
        "- Output 'parameter_ranges' dictionary only and enclose your code "
        "with other Python code block: ```python ... ```."
    )


def ranked_listing(sources: list[str]) -> str:
    """Render deduplicated parents as a numbered best-to-worst listing."""
    parts = []
    for i, src in enumerate(sources, start=1):
        parts.append(f"[Heuristic {i}]\n```python\n{src}\n```")
    return "\n\n".join(parts)


def function_signature(source: str, fallback: str = "") -> str:
    """The ``def name(...)`` header of the first top-level function."""
    try:
        tree = ast.parse(source)
    except SyntaxError:
        return fallback
    for node in tree.body:
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            header = source.splitlines()[node.lineno - 1].strip()
            return header
    return fallback
