"""Recursive descent parser producing :class:`~polyfal.dsl.ast.Program` trees."""

from __future__ import annotations

from collections.abc import Sequence

from polyfal.dsl.ast import (
    MEMBER_ITERATORS,
    Assign,
    Binary,
    Block,
    BoolLit,
    Break,
    Call,
    Expr,
    ExprStmt,
    FloatLit,
    Foreach,
    FunctionDecl,
    If,
    Index,
    IntLit,
    IteratorKind,
    Loc,
    Member,
    MethodCall,
    Name,
    Param,
    ParallelSections,
    Program,
    Return,
    Single,
    Stmt,
    TypeName,
    Unary,
    VarDecl,
    While,
)
from polyfal.dsl.lexer import tokenize
from polyfal.dsl.tokens import Token, TokenKind
from polyfal.dsl.types import DslType, TypeKind
from polyfal.exceptions import ParseError, SemanticError

_INT64_MAX = 2**63 - 1

_TYPE_KEYWORDS = {
    TokenKind.INT: TypeKind.INT,
    TokenKind.FLOAT: TypeKind.FLOAT,
    TokenKind.BOOL: TypeKind.BOOL,
    TokenKind.VOID: TypeKind.VOID,
    TokenKind.GRAPH: TypeKind.GRAPH,
    TokenKind.POINT: TypeKind.POINT,
    TokenKind.EDGE: TypeKind.EDGE,
    TokenKind.SET: TypeKind.SET,
    TokenKind.COLLECTION: TypeKind.COLLECTION,
}

_TYPENAME_ARGUMENTS = {
    TokenKind.INT: "int",
    TokenKind.FLOAT: "float",
    TokenKind.BOOL: "bool",
    TokenKind.POINT: "Point",
}

# Binary operator levels, loosest binding first
_BINARY_LEVELS: tuple[tuple[TokenKind, ...], ...] = (
    (TokenKind.OR_OR,),
    (TokenKind.AND_AND,),
    (TokenKind.EQ_EQ, TokenKind.BANG_EQ),
    (TokenKind.LT, TokenKind.LE, TokenKind.GT, TokenKind.GE),
    (TokenKind.PLUS, TokenKind.MINUS),
    (TokenKind.STAR, TokenKind.SLASH, TokenKind.PERCENT),
)

_RETURN_TYPES = (TokenKind.INT, TokenKind.FLOAT, TokenKind.BOOL, TokenKind.VOID)

_ASSIGN_TOKENS = {
    TokenKind.EQ,
    TokenKind.PLUS_EQ,
    TokenKind.MINUS_EQ,
}


class Parser:
    """A recursive descent parser over a token list.

    The parser tracks which names denote Sets so that a bare ``foreach`` subject
    can be classified as a set or a collection iteration.
    """

    def __init__(self, tokens: Sequence[Token]):
        if not tokens or tokens[-1].kind is not TokenKind.EOF:
            raise ValueError("The token list must end with an end-of-input token.")
        self._tokens = list(tokens)
        self._pos = 0
        self._set_names: list[set[str]] = [set()]
        self._foreach_depth = 0

    ##### Token handling #####

    @property
    def _current(self) -> Token:
        return self._tokens[self._pos]

    def _peek(self, offset: int = 1) -> Token:
        return self._tokens[min(self._pos + offset, len(self._tokens) - 1)]

    def _at(self, *kinds: TokenKind) -> bool:
        return self._current.kind in kinds

    def _advance(self) -> Token:
        token = self._current
        if token.kind is not TokenKind.EOF:
            self._pos += 1
        return token

    def _accept(self, kind: TokenKind) -> Token | None:
        return self._advance() if self._at(kind) else None

    def _error(self, expected: str, token: Token | None = None) -> ParseError:
        token = token or self._current
        found = token.describe()
        return ParseError(
            f"expected {expected}, found {found}",
            token.line,
            token.col,
            expected=expected,
            found=found,
        )

    def _expect(self, kind: TokenKind, expected: str | None = None) -> Token:
        if not self._at(kind):
            raise self._error(expected or f"'{kind.value}'")
        return self._advance()

    @staticmethod
    def _loc(token: Token) -> Loc:
        return token.line, token.col

    def _ident(self) -> str:
        return self._expect(TokenKind.IDENT, "identifier").lexeme

    ##### Declarations #####

    def parse_program(self) -> Program:
        """Parse a complete program."""
        globals_: list[VarDecl] = []
        functions: list[FunctionDecl] = []
        main: FunctionDecl | None = None

        while not self._at(TokenKind.EOF):
            start = self._current
            is_function = self._peek(2).kind is TokenKind.LPAREN
            if start.kind in _RETURN_TYPES and is_function:
                fn = self._function()
                if fn.name == "main":
                    if main is not None:
                        raise SemanticError(
                            "duplicate function 'main'", *self._loc(start)
                        )
                    main = fn
                elif any(f.name == fn.name for f in functions):
                    raise SemanticError(
                        f"duplicate function '{fn.name}'", *self._loc(start)
                    )
                else:
                    functions.append(fn)
            else:
                globals_.extend(self._declaration())
                self._set_names[0].update(
                    d.name for d in globals_ if d.dtype.kind is TypeKind.SET
                )

        if main is None:
            raise self._error("function 'main'")
        return Program(globals_, functions, main, loc=(1, 1))

    def _type(self) -> tuple[DslType, Token]:
        token = self._current
        if token.kind not in _TYPE_KEYWORDS:
            raise self._error("type")
        self._advance()
        kind = _TYPE_KEYWORDS[token.kind]
        if kind is TypeKind.COLLECTION:
            self._expect(TokenKind.LT)
            self._expect(TokenKind.POINT, "'Point'")
            self._expect(TokenKind.GT)
        return DslType(kind), token

    def _function(self) -> FunctionDecl:
        ret, start = self._type()
        name = self._ident()
        self._expect(TokenKind.LPAREN)
        self._set_names.append(set())
        params: list[Param] = []
        if not self._at(TokenKind.RPAREN):
            params.append(self._param())
            while self._accept(TokenKind.COMMA):
                params.append(self._param())
        self._expect(TokenKind.RPAREN)

        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise SemanticError(
                f"duplicate parameter name in function '{name}'", *self._loc(start)
            )
        self._set_names[-1].update(
            p.name for p in params if p.dtype.kind is TypeKind.SET
        )
        body = self._block()
        self._set_names.pop()
        return FunctionDecl(ret, name, params, body, loc=self._loc(start))

    def _param(self) -> Param:
        start = self._current
        if self._accept(TokenKind.CHAR):
            self._expect(TokenKind.STAR)
            name = self._ident()
            self._expect(TokenKind.LBRACKET)
            self._expect(TokenKind.RBRACKET)
            return Param(DslType(TypeKind.ARGV), name, loc=self._loc(start))
        dtype, _ = self._type()
        if dtype.is_graph_element and self._at(TokenKind.LPAREN):
            dtype = dtype.bound_to(self._binding())
        return Param(dtype, self._ident(), loc=self._loc(start))

    def _binding(self) -> str:
        self._expect(TokenKind.LPAREN)
        graph = self._ident()
        self._expect(TokenKind.RPAREN)
        return graph

    def _declaration(self) -> list[VarDecl]:
        """Parse a declaration statement, splitting it into one node per variable."""
        base, _ = self._type()
        decls = [self._declarator(base)]
        while self._accept(TokenKind.COMMA):
            decls.append(self._declarator(base))
        self._expect(TokenKind.SEMI)
        return decls

    def _declarator(self, base: DslType) -> VarDecl:
        start = self._current
        dtype = base
        if base.is_graph_element and self._at(TokenKind.LPAREN):
            dtype = base.bound_to(self._binding())
        name = self._ident()
        if base.is_container and self._at(TokenKind.LPAREN):
            dtype = base.bound_to(self._binding())
        if base.kind is TypeKind.SET and dtype.graph is None:
            raise self._error("'(' graph ')' after set name")
        init = self._expression() if self._accept(TokenKind.EQ) else None
        if base.kind is TypeKind.SET:
            self._set_names[-1].add(name)
        return VarDecl(dtype, name, init, loc=self._loc(start))

    ##### Statements #####

    def _block(self) -> Block:
        start = self._expect(TokenKind.LBRACE)
        self._set_names.append(set())
        stmts: list[Stmt] = []
        while not self._at(TokenKind.RBRACE):
            if self._at(TokenKind.EOF):
                raise self._error("'}'")
            stmts.extend(self._statements())
        self._advance()
        self._set_names.pop()
        return Block(stmts, loc=self._loc(start))

    def _statement(self) -> Stmt:
        """Parse a statement in a position that admits exactly one."""
        start = self._current
        stmts = self._statements()
        if len(stmts) == 1:
            return stmts[0]
        return Block(stmts, loc=self._loc(start))

    def _statements(self) -> list[Stmt]:
        token = self._current
        loc = self._loc(token)
        match token.kind:
            case TokenKind.LBRACE:
                return [self._block()]
            case kind if kind in _TYPE_KEYWORDS and kind is not TokenKind.VOID:
                return list(self._declaration())
            case TokenKind.FOREACH:
                return [self._foreach()]
            case TokenKind.IF:
                self._advance()
                cond = self._paren_expression()
                then = self._statement()
                orelse = self._statement() if self._accept(TokenKind.ELSE) else None
                return [If(cond, then, orelse, loc=loc)]
            case TokenKind.WHILE:
                self._advance()
                cond = self._paren_expression()
                return [While(cond, self._statement(), loc=loc)]
            case TokenKind.BREAK:
                self._advance()
                self._expect(TokenKind.SEMI)
                return [Break(loc=loc)]
            case TokenKind.RETURN:
                self._advance()
                value = None if self._at(TokenKind.SEMI) else self._expression()
                self._expect(TokenKind.SEMI)
                return [Return(value, loc=loc)]
            case TokenKind.SINGLE:
                self._advance()
                target = self._paren_expression()
                then = self._statement()
                orelse = self._statement() if self._accept(TokenKind.ELSE) else None
                return [Single(target, then, orelse, loc=loc)]
            case TokenKind.PARALLEL:
                return [self._sections()]
            case TokenKind.SEMI:
                raise self._error("statement")
        return [self._simple_statement()]

    def _paren_expression(self) -> Expr:
        self._expect(TokenKind.LPAREN)
        expr = self._expression()
        self._expect(TokenKind.RPAREN)
        return expr

    def _foreach(self) -> Foreach:
        start = self._advance()
        self._expect(TokenKind.LPAREN)
        var = self._ident()
        self._expect(TokenKind.IN, "'In'")
        subject_token = self._current
        subject = self._postfix()
        iterator: IteratorKind
        if isinstance(subject, Member) and subject.name in MEMBER_ITERATORS:
            iterator = MEMBER_ITERATORS[subject.name]
            subject = subject.obj
        elif isinstance(subject, Name):
            in_sets = any(subject.id in scope for scope in self._set_names)
            iterator = (
                IteratorKind.SET_ITEMS if in_sets else IteratorKind.COLLECTION_ITEMS
            )
        else:
            raise self._error("iteration subject", subject_token)
        self._expect(TokenKind.RPAREN)
        filter_ = self._paren_expression() if self._at(TokenKind.LPAREN) else None

        outer = self._foreach_depth == 0 and iterator.is_graph_wide
        self._foreach_depth += 1
        body = self._statement()
        self._foreach_depth -= 1
        return Foreach(
            var, subject, iterator, filter_, body, outer, loc=self._loc(start)
        )

    def _sections(self) -> ParallelSections:
        start = self._advance()
        self._expect(TokenKind.SECTIONS, "'sections'")
        self._expect(TokenKind.LBRACE)
        sections: list[Block] = []
        while self._accept(TokenKind.SECTION):
            sections.append(self._block())
        self._expect(TokenKind.RBRACE, "'section' or '}'")
        if not sections:
            raise self._error("at least one 'section'", start)
        return ParallelSections(sections, loc=self._loc(start))

    def _simple_statement(self) -> Stmt:
        start = self._current
        loc = self._loc(start)
        target = self._expression()
        if self._at(TokenKind.PLUS_PLUS, TokenKind.MINUS_MINUS):
            op = self._advance().lexeme
            self._expect(TokenKind.SEMI)
            return Assign(target, op, loc=loc)
        if self._current.kind in _ASSIGN_TOKENS:
            op = self._advance().lexeme
            value = self._expression()
            self._expect(TokenKind.SEMI)
            return Assign(target, op, value, loc=loc)
        if not isinstance(target, (Call, MethodCall)):
            raise self._error("assignment or call", start)
        self._expect(TokenKind.SEMI)
        return ExprStmt(target, loc=loc)

    ##### Expressions #####

    def _expression(self, level: int = 0) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self._unary()
        left = self._expression(level + 1)
        while self._current.kind in _BINARY_LEVELS[level]:
            op_token = self._advance()
            right = self._expression(level + 1)
            left = Binary(op_token.lexeme, left, right, loc=left.loc)
        return left

    def _unary(self) -> Expr:
        if self._at(TokenKind.MINUS, TokenKind.BANG):
            token = self._advance()
            return Unary(token.lexeme, self._unary(), loc=self._loc(token))
        return self._postfix()

    def _postfix(self) -> Expr:
        expr = self._primary()
        while True:
            if self._accept(TokenKind.DOT):
                name_token = self._current
                name = self._ident()
                if self._at(TokenKind.LPAREN):
                    args = self._arguments()
                    expr = MethodCall(expr, name, args, loc=self._loc(name_token))
                else:
                    expr = Member(expr, name, loc=self._loc(name_token))
            elif self._at(TokenKind.LBRACKET):
                token = self._advance()
                index = self._expression()
                self._expect(TokenKind.RBRACKET)
                expr = Index(expr, index, loc=self._loc(token))
            else:
                return expr

    def _arguments(self) -> list[Expr]:
        self._expect(TokenKind.LPAREN)
        args: list[Expr] = []
        if not self._at(TokenKind.RPAREN):
            args.append(self._argument())
            while self._accept(TokenKind.COMMA):
                args.append(self._argument())
        self._expect(TokenKind.RPAREN)
        return args

    def _argument(self) -> Expr:
        token = self._current
        if token.kind in _TYPENAME_ARGUMENTS and self._peek().kind in (
            TokenKind.COMMA,
            TokenKind.RPAREN,
        ):
            self._advance()
            return TypeName(_TYPENAME_ARGUMENTS[token.kind], loc=self._loc(token))
        return self._expression()

    def _primary(self) -> Expr:
        token = self._current
        loc = self._loc(token)
        match token.kind:
            case TokenKind.INT_LIT:
                self._advance()
                value = int(token.lexeme)
                if value > _INT64_MAX:
                    raise ParseError(
                        "integer literal out of range",
                        token.line,
                        token.col,
                        expected="64-bit integer",
                        found=token.describe(),
                    )
                return IntLit(value, loc=loc)
            case TokenKind.FLOAT_LIT:
                self._advance()
                return FloatLit(float(token.lexeme), loc=loc)
            case TokenKind.TRUE | TokenKind.FALSE:
                self._advance()
                return BoolLit(token.kind is TokenKind.TRUE, loc=loc)
            case TokenKind.IDENT:
                self._advance()
                if self._at(TokenKind.LPAREN):
                    return Call(token.lexeme, self._arguments(), loc=loc)
                return Name(token.lexeme, loc=loc)
            case TokenKind.LPAREN:
                self._advance()
                expr = self._expression()
                self._expect(TokenKind.RPAREN)
                return expr
        raise self._error("expression")


def parse(tokens: Sequence[Token]) -> Program:
    """Parse a token list into a program.

    Args:
        tokens: The tokens, ending with an end-of-input token.

    Returns:
        The parsed program. Multi-variable declarations are split into one
        declaration per variable.

    Raises:
        ParseError: If the tokens do not form a program.
        SemanticError: If a function or parameter name is duplicated.
    """
    return Parser(tokens).parse_program()


def parse_source(source: str) -> Program:
    """Tokenize and parse DSL source text.

    Example:
        >>> program = parse_source("int main() { }")
        >>> program.globals, program.functions, program.main.body.stmts
        ((), (), ())
    """
    return parse(tokenize(source))

