import json

from lark import Lark, Token, Transformer, v_args


class ConfigParser:
    grammar = r"""
        start: _NL* section*

        // A section header on its own line, then zero or more entries.
        section: "[" NAME "]" _NL+ entry*

        entry: NAME "=" value _NL+

        ?value: number | list | word | string

        // Vectors and grids: two or more comma-separated numbers.
        list: number ("," number)+

        number: SIGNED_NUMBER
        // Bare words carry enum values and the "auto" marker.
        word: NAME
        string: ESCAPED_STRING

        NAME: /[A-Za-z_][A-Za-z0-9_\-]*/
        COMMENT: /[#;][^\n]*/
        _NL: /(\r?\n[\t ]*)+/

        %import common.SIGNED_NUMBER
        %import common.ESCAPED_STRING
        %import common.WS_INLINE
        %ignore WS_INLINE
        %ignore COMMENT
    """

    class ConfigTransformer(Transformer):
        def extract_value(self, arg):
            return str(arg) if isinstance(arg, Token) else arg

        def start(self, children):
            sections = {}
            duplicates = []
            for name, entries in children:
                if name in sections:
                    duplicates.append(f"[{name}]")
                    target = sections[name]
                else:
                    target = sections.setdefault(name, {})
                for key, value in entries:
                    if key in target:
                        duplicates.append(f"{name}.{key}")
                    target[key] = value
            return {"sections": sections, "duplicates": duplicates}

        def section(self, children):
            name = self.extract_value(children[0])
            return name, list(children[1:])

        @v_args(inline=True)
        def entry(self, name, value):
            return self.extract_value(name), value

        def list(self, children):
            return tuple(children)

        @v_args(inline=True)
        def number(self, token):
            text = self.extract_value(token)
            if any(c in text for c in ".eE"):
                return float(text)
            return int(text)

        @v_args(inline=True)
        def word(self, token):
            return self.extract_value(token)

        @v_args(inline=True)
        def string(self, token):
            return json.loads(self.extract_value(token))

    def __init__(self):
        self.parser = Lark(
            self.grammar,
            parser="lalr",
            transformer=self.ConfigTransformer()
        )

    def parse(self, text: str):
        try:
            # every entry must end in a newline, including the last one
            return self.parser.parse(text + "\n")
        except Exception as e:
            return {"error": str(e), "input": text}


if __name__ == "__main__":
    parser = ConfigParser()
    samples = [
        "[atom]\nmass_u = 114\nwavelength = 226.5e-9\n",
        "[laser]\nbeam_dir = 0.57735, 0.57735, 0.57735  # (1,1,1)/sqrt(3)\n",
        "[sim]\nburn_in_pulses = auto\nemission_delay_mode = sampled",
        "[scan]\ntemperature_csv = \"out/temperature_scan.csv\"\n",
        "mass = 1\n",
    ]
    for text in samples:
        print(parser.parse(text))
