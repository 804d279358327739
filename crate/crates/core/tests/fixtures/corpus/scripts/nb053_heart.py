import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.svm import SVC
from sklearn.metrics import classification_report

df = pd.read_csv('data/heart.csv')

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

df.tail()
df.columns
print(len(df))

for col in df.columns:
    print(col, df[col].nunique())

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

print(df['age'].describe())
print(df['age'].skew())
sns.histplot(df['age'], kde=True)
plt.show()

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['age'].plot(kind='hist', ax=ax[0])
df.boxplot(column='age', ax=ax[1])
plt.show()

df = df.dropna(subset=['target'])
df['chest_pain'] = df['chest_pain'].fillna(df['chest_pain'].mode()[0])
df['sex'] = df['sex'].fillna(df['sex'].mode()[0])
df['age'] = df['age'].fillna(df['age'].median())
df['resting_bp'] = df['resting_bp'].fillna(df['resting_bp'].median())
df['cholesterol'] = df['cholesterol'].fillna(df['cholesterol'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.3, random_state=79)
print(X_train.shape, X_test.shape)


model = SVC()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print(classification_report(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
