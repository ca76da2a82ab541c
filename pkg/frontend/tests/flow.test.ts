import { describe, expect, it, vi } from 'vitest';

import type { Assignment, Point } from '../src/api.js';
import { StudyApi } from '../src/api.js';
import type { FlowDelegate, RevealOutcome } from '../src/flow.js';
import { SessionFlow } from '../src/flow.js';

const POINTS: Point[] = [
	[50, 50],
	[100, 80],
	[200, 200],
	[300, 120],
	[400, 400],
];

function assignment(overrides: Partial<Assignment> = {}): Assignment {
	return {
		user_id: 'alice',
		group: 'RTL',
		image_id: 'grid',
		image_width: 640,
		image_height: 480,
		tolerance: 10,
		practice_image_id: 'practice',
		reveal: { direction: 'RTL', duration_s: 20 },
		session: 1,
		session_opens_at: 0,
		practice_done: false,
		awaiting_confirmation: false,
		...overrides,
	};
}

interface MockApi {
	api: StudyApi;
	calls: string[];
	fetchMock: ReturnType<typeof vi.fn>;
}

/** StudyApi against a scripted fetch; records "METHOD path" call order. */
function mockApi(handlers: Record<string, (body: any) => unknown>): MockApi {
	const calls: string[] = [];
	const fetchMock = vi.fn(async (url: string, init?: RequestInit) => {
		const path = url.replace(/\?.*$/, '');
		const method = init?.method ?? 'GET';
		calls.push(`${method} ${path}`);
		const key = `${method} ${path}`;
		if (!(key in handlers)) {
			return new Response(JSON.stringify({ detail: { error: 'missing', message: key } }), {
				status: 500,
			});
		}
		const body = init?.body ? JSON.parse(init.body as string) : undefined;
		const result = handlers[key](body);
		if (result instanceof Response) return result;
		return new Response(JSON.stringify(result), { status: 200 });
	});
	return { api: new StudyApi('', fetchMock as unknown as typeof fetch), calls, fetchMock };
}

function scriptedDelegate(log: string[], overrides: Partial<FlowDelegate> = {}): FlowDelegate {
	return {
		showInstructions: async (session) => {
			log.push(`instructions:${session}`);
		},
		runReveal: async (reveal, imageId): Promise<RevealOutcome> => {
			log.push(`reveal:${reveal.direction}:${imageId}`);
			const now = Date.now() / 1000;
			return reveal.direction === 'none'
				? { displayedAt: now }
				: { displayedAt: now - reveal.duration_s, revealStartedAt: now - reveal.duration_s, revealEndedAt: now };
		},
		capturePassword: async (purpose) => {
			log.push(`capture:${purpose}`);
			return POINTS;
		},
		collectQuestionnaire: async (session) => {
			log.push(`questionnaire:${session}`);
			return { strategy: 'shapes', watched_reveal: true, distracted: false };
		},
		collectSus: async () => {
			log.push('sus');
			return Array(10).fill(3);
		},
		confirmReset: async () => {
			log.push('confirm-reset');
			return false;
		},
		notify: (message) => {
			log.push(`notify:${message.slice(0, 24)}`);
		},
		...overrides,
	};
}

describe('SessionFlow session 1', () => {
	it('runs instructions, practice with the same reveal, create, questionnaire, confirm login', async () => {
		const { api, calls } = mockApi({
			'GET /assignment': () => assignment(),
			'POST /practice-complete': () => ({ status: 'ok' }),
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /login': () => ({ success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 }),
		});
		const log: string[] = [];
		const flow = new SessionFlow(api, 'alice', scriptedDelegate(log), { viewportWidth: 1280 });
		const result = await flow.run();
		expect(result).toEqual({ session: 1, status: 'completed' });
		expect(log).toEqual([
			'instructions:1',
			'reveal:RTL:practice', // practice uses the same curtain direction
			'capture:practice',
			'reveal:RTL:grid',
			'capture:create',
			'questionnaire:1',
			'reveal:none:grid', // confirmation login shows the image immediately
			'capture:login',
		]);
		expect(calls).toEqual([
			'GET /assignment',
			'POST /practice-complete',
			'POST /password',
			'POST /questionnaire',
			'POST /login',
		]);
	});

	it('control group never sees a reveal animation', async () => {
		const { api } = mockApi({
			'GET /assignment': () =>
				assignment({ group: 'control', reveal: { direction: 'none', duration_s: 20 } }),
			'POST /practice-complete': () => ({ status: 'ok' }),
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /login': () => ({ success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 }),
		});
		const log: string[] = [];
		await new SessionFlow(api, 'alice', scriptedDelegate(log), { viewportWidth: 1280 }).run();
		const reveals = log.filter((l) => l.startsWith('reveal:'));
		expect(reveals.every((r) => r.startsWith('reveal:none'))).toBe(true);
	});

	it('skips practice when already done', async () => {
		const { api, calls } = mockApi({
			'GET /assignment': () => assignment({ practice_done: true }),
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /login': () => ({ success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 }),
		});
		const log: string[] = [];
		await new SessionFlow(api, 'alice', scriptedDelegate(log), { viewportWidth: 1280 }).run();
		expect(log.filter((l) => l === 'capture:practice')).toEqual([]);
		expect(calls).not.toContain('POST /practice-complete');
	});

	it('forwards reveal timestamps to the service with the questionnaire', async () => {
		let questionnaireBody: any = null;
		const { api } = mockApi({
			'GET /assignment': () => assignment({ practice_done: true }),
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
			'POST /questionnaire': (body) => {
				questionnaireBody = body;
				return { status: 'stored' };
			},
			'POST /login': () => ({ success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 }),
		});
		await new SessionFlow(api, 'alice', scriptedDelegate([]), { viewportWidth: 1280 }).run();
		expect(questionnaireBody.answers.reveal_started_at).toBeTypeOf('number');
		expect(questionnaireBody.answers.reveal_ended_at).toBeTypeOf('number');
		expect(questionnaireBody.answers.reveal_ended_at).toBeGreaterThanOrEqual(
			questionnaireBody.answers.reveal_started_at,
		);
	});

	it('sends login timing from the image-display signal', async () => {
		let loginBody: any = null;
		const { api } = mockApi({
			'GET /assignment': () => assignment({ practice_done: true }),
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /login': (body) => {
				loginBody = body;
				return { success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 };
			},
		});
		await new SessionFlow(api, 'alice', scriptedDelegate([]), { viewportWidth: 1280 }).run();
		expect(loginBody.displayed_at).toBeTypeOf('number');
		expect(loginBody.displayed_at).toBeLessThanOrEqual(Date.now() / 1000);
	});
});

describe('SessionFlow gates', () => {
	it('narrow viewports get the desktop-required page and no API mutations', async () => {
		const { api, calls } = mockApi({ 'GET /assignment': () => assignment() });
		const log: string[] = [];
		const result = await new SessionFlow(api, 'alice', scriptedDelegate(log), {
			viewportWidth: 500, // narrower than the 640 px image
		}).run();
		expect(result.status).toBe('desktop-required');
		expect(calls).toEqual(['GET /assignment']);
		expect(log.some((l) => l.startsWith('notify:'))).toBe(true);
	});

	it('sessions that are not open yet stop at the gate', async () => {
		const { api } = mockApi({
			'GET /assignment': () =>
				assignment({ session: 2, session_opens_at: Date.now() / 1000 + 3600 }),
		});
		const result = await new SessionFlow(api, 'alice', scriptedDelegate([]), {
			viewportWidth: 1280,
		}).run();
		expect(result.status).toBe('session-not-open');
	});
});

describe('SessionFlow sessions 2 and 3', () => {
	it('session 2 is instructions then login, no reveal animation', async () => {
		const { api } = mockApi({
			'GET /assignment': () => assignment({ session: 2, practice_done: true }),
			'POST /login': () => ({ success: true, session: 2, session_completed: true, unsuccessful_attempts: 0 }),
		});
		const log: string[] = [];
		const result = await new SessionFlow(api, 'alice', scriptedDelegate(log), {
			viewportWidth: 1280,
		}).run();
		expect(result).toEqual({ session: 2, status: 'completed' });
		expect(log).toEqual(['instructions:2', 'reveal:none:grid', 'capture:login']);
	});

	it('session 2 give-up offers a reset, recreates, and waits out the delay', async () => {
		let stage = 2;
		const { api, calls } = mockApi({
			'GET /assignment': () =>
				stage === 2
					? assignment({ session: 2, practice_done: true })
					: assignment({ session: 1, practice_done: true }),
			'POST /login': (body) =>
				stage === 2
					? { success: false, session: 2, session_completed: false, unsuccessful_attempts: 1 }
					: { success: true, session: 1, session_completed: true, unsuccessful_attempts: 0 },
			'POST /reset': () => {
				stage = 1;
				return { status: 'reset', next: 'create-password', session: 2 };
			},
			'POST /password': () => ({ status: 'created', next: 'confirmation-login' }),
		});
		const log: string[] = [];
		const delegate = scriptedDelegate(log, {
			confirmReset: async () => {
				log.push('confirm-reset');
				return true;
			},
		});
		const result = await new SessionFlow(api, 'alice', delegate, {
			viewportWidth: 1280,
			maxLoginAttempts: 1,
		}).run();
		expect(result).toEqual({ session: 2, status: 'reset-wait' });
		expect(calls).toContain('POST /reset');
		expect(calls).toContain('POST /password');
		// recreation replays the curtain on the original image
		expect(log).toContain('reveal:RTL:grid');
	});

	it('session 3 failure path still reaches the exit survey and SUS', async () => {
		const { api, calls } = mockApi({
			'GET /assignment': () => assignment({ session: 3, practice_done: true }),
			'POST /login': () => ({ success: false, session: 3, session_completed: false, unsuccessful_attempts: 1 }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /sus': () => ({ status: 'stored', score: 50 }),
		});
		const log: string[] = [];
		const result = await new SessionFlow(api, 'alice', scriptedDelegate(log), {
			viewportWidth: 1280,
			maxLoginAttempts: 2,
		}).run();
		expect(result).toEqual({ session: 3, status: 'failed' });
		expect(log).toContain('questionnaire:3');
		expect(log).toContain('sus');
		expect(calls.filter((c) => c === 'POST /login')).toHaveLength(2);
		expect(calls).toContain('POST /sus');
	});

	it('session 3 success also collects the exit survey', async () => {
		const { api } = mockApi({
			'GET /assignment': () => assignment({ session: 3, practice_done: true }),
			'POST /login': () => ({ success: true, session: 3, session_completed: true, unsuccessful_attempts: 0 }),
			'POST /questionnaire': () => ({ status: 'stored' }),
			'POST /sus': () => ({ status: 'stored', score: 75 }),
		});
		const log: string[] = [];
		const result = await new SessionFlow(api, 'alice', scriptedDelegate(log), {
			viewportWidth: 1280,
		}).run();
		expect(result).toEqual({ session: 3, status: 'completed' });
		expect(log).toContain('sus');
	});
});
